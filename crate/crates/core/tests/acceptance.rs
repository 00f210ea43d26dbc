//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with timing.
//!
//! Runs without the libtest harness so every line is printed even when an
//! earlier criterion fails. Exits non-zero when a criterion outside
//! `KNOWN_RED` fails.

// A NaN must fail a check, so conditions are negated as written.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::time::Instant;

use rand::Rng;
use robustlab_core::rng::{generator, substream};
use robustlab_core::*;

type Outcome = std::result::Result<String, String>;

/// Criteria whose failure is expected and analysed in the README.
const KNOWN_RED: &[&str] = &["10b"];

macro_rules! check {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

trait OrFail<T> {
    fn or_fail(self, what: &str) -> std::result::Result<T, String>;
}

impl<T, E: std::fmt::Display> OrFail<T> for std::result::Result<T, E> {
    fn or_fail(self, what: &str) -> std::result::Result<T, String> {
        self.map_err(|e| format!("{what}: {e}"))
    }
}

/// Piecewise-linear interpolation of `min(√x, 2)` on `{0, 1, 4, 4.5, 5.5}`.
fn remark_pl() -> UtilitySpec {
    UtilitySpec::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (4.0, 2.0), (4.5, 2.0), (5.5, 2.0)]).unwrap()
}

fn lp(family: &ModelFamily, u: &UtilitySpec, w0: f64, mode: AdmissibilityMode) -> std::result::Result<RobustSolution, String> {
    solve_lp(family, u, w0, mode, LpOptions::default()).or_fail(&format!("solve_lp ({mode})"))
}

fn remark_value() -> Outcome {
    let fam = gen_remark_example(100.0, 201).or_fail("fixture")?;
    let u = UtilitySpec::capped_sqrt(2.0).unwrap();
    let phi = Strategy::per_depth(&fam.tree, &[vec![1.0], vec![1.0]]).or_fail("strategy")?;
    let v = evaluate_robust(&fam, &u, 1.0, &phi).or_fail("evaluate")?;
    check!((v - 1.25).abs() <= 1e-12, "evaluate_robust = {v:.15}, expected 1.25");
    let s = lp(&fam, &remark_pl(), 1.0, AdmissibilityMode::TerminalOnly)?;
    check!(s.value >= 1.25 - 1e-9, "terminal value {} < 1.25", s.value);
    Ok(format!("evaluate = {v}, terminal LP value = {:.6}", s.value))
}

fn remark_upper_bound() -> Outcome {
    let mut values = Vec::new();
    for m in [10.0, 100.0, 1000.0] {
        let fam = gen_remark_example(m, 201).or_fail("fixture")?;
        let s = lp(&fam, &remark_pl(), 1.0, AdmissibilityMode::Intermediate)?;
        let bound = (1.0 + 3.0 / m).sqrt();
        check!(s.value <= bound + 1e-9, "M = {m}: value {} above √(1 + 3/M) = {bound}", s.value);
        check!(s.value >= 1.0 - 1e-9, "M = {m}: value {} below U(w0) = 1", s.value);
        values.push(s.value);
    }
    check!(
        values.windows(2).all(|w| w[1] < w[0]),
        "values do not decrease in M: {values:?}"
    );
    Ok(format!(
        "M = 10, 100, 1000 -> {:.7}, {:.7}, {:.7}",
        values[0], values[1], values[2]
    ))
}

fn bachelier_emm() -> Outcome {
    let mut worst = 0.0f64;
    for t in 1..=3 {
        for (sigma, mu) in [(1.0, 0.0), (1.0, 0.5), (2.0, -1.0)] {
            let fam = gen_bachelier(t, 0.5, 0.0, &[(sigma, mu)]).or_fail("fixture")?;
            let q = find_emm(&fam.tree, &fam.models[0]).or_fail("find_emm")?.measure;
            let exact = bachelier_emm_closed_form(t, sigma, mu).or_fail("closed form")?;
            for (a, b) in q.weights.iter().zip(&exact.weights) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    check!(worst <= 1e-9, "largest leaf deviation {worst:e}");
    let exact = bachelier_emm_closed_form(2, 1.0, 0.5).or_fail("closed form")?;
    check!(
        exact.weights == [1.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 9.0 / 16.0],
        "T = 2 weights {:?}",
        exact.weights
    );
    Ok(format!("9 cases, largest leaf deviation {worst:.1e}; T = 2 weights (1, 3, 3, 9)/16"))
}

fn time_consistency() -> Outcome {
    let (_, laws) = gen_two_drift().or_fail("fixture")?;
    let v = time_consistency_check(&laws).or_fail("check")?;
    check!(!v.consistent, "two-drift family reported consistent");
    let witness = v.witness.map(|w| w.describe()).unwrap_or_default();
    check!(witness == "P_0^1 ⊗ P_1^2", "witness `{witness}`");
    let closure: Vec<PathLaw> = laws
        .iter()
        .flat_map(|a| laws.iter().map(move |b| recombine(a, b)))
        .collect();
    let c = time_consistency_check(&closure).or_fail("closure check")?;
    check!(c.consistent, "closure reported inconsistent");
    Ok(format!("witness {witness}; closure of {} laws consistent", closure.len()))
}

const TREES: u64 = 500;
const TREE_SEED: u64 = 0x5eed;

fn random_case(i: u64) -> (FilteredTree, PriceModel) {
    let mut rng = substream(TREE_SEED, i);
    let tree = common::random_tree(&mut rng, 3, 4);
    let d = rng.gen_range(1..=2);
    let model = common::random_model(&mut rng, &tree, d, "s", -2, 2);
    (tree, model)
}

fn ftap() -> Outcome {
    let mut na = 0;
    for i in 0..TREES {
        let (tree, model) = random_case(i);
        let holds = na_check(&tree, &model).holds;
        check!(
            holds != common::has_arbitrage(&tree, &model),
            "tree {i}: na_check = {holds} disagrees with the direction search"
        );
        match find_emm(&tree, &model) {
            Ok(e) => {
                check!(holds, "tree {i}: measure found although na_check fails");
                let m = verify_martingale(&tree, &model, &e.measure, 1e-9).or_fail("verify")?;
                check!(m.holds, "tree {i}: drift {:e} at node {:?}", m.max_drift, m.worst_node);
                check!(e.measure.is_equivalent(), "tree {i}: measure not equivalent");
                na += 1;
            }
            Err(Error::ArbitrageInModel(_)) => check!(!holds, "tree {i}: no measure although na_check holds"),
            Err(e) => return Err(format!("tree {i}: {e}")),
        }
    }
    Ok(format!("{TREES} trees, {na} arbitrage free, {} with arbitrage", TREES - na as u64))
}

fn certificate_soundness() -> Outcome {
    const DIRECTIONS: usize = 10_000;
    let opts = CertOptions::default();
    let (mut nodes, mut redrawn) = (0, 0);
    for i in 0..TREES {
        let (tree, mut model) = random_case(i);
        if !na_check(&tree, &model).holds {
            let mut rng = substream(TREE_SEED ^ 0xa11, i);
            model = common::random_na_model(&mut rng, &tree, model.dim(), "s", -2, 2);
            redrawn += 1;
        }
        let mut rng = substream(TREE_SEED ^ 0xd1, i);
        for &n in tree.internal_nodes() {
            let hull = conditional_support(&tree, &model, n);
            if hull.dim() == 0 {
                continue;
            }
            let (beta, kappa) = beta_kappa(&tree, &model, n, opts).or_fail("beta_kappa")?;
            check!(beta > 0.0 && kappa > 0.0, "tree {i} node {n}: ({beta}, {kappa})");
            let incs = model.child_increments(&tree, n);
            let probs: Vec<f64> = tree.children(n).iter().map(|&c| tree.cond_prob(c)).collect();
            let scale = incs.iter().map(|v| linalg::norm(v)).fold(0.0, f64::max);
            for _ in 0..DIRECTIONS {
                let y = hull.embed(&common::unit(&mut rng, hull.dim()));
                let mass: f64 = incs
                    .iter()
                    .zip(&probs)
                    .filter(|(v, _)| linalg::dot(&y, v) <= -beta + 1e-12 * scale)
                    .map(|(_, p)| p)
                    .sum();
                check!(
                    mass >= kappa - 1e-12,
                    "tree {i} node {n}: mass {mass} below kappa {kappa} in direction {y:?}"
                );
            }
            nodes += 1;
        }
    }
    Ok(format!(
        "{nodes} nodes x {DIRECTIONS} directions, 0 violations ({redrawn} models redrawn arbitrage free)"
    ))
}

fn strategy_bounds() -> Outcome {
    let fam = gen_remark_example(100.0, 201).or_fail("fixture")?;
    let star_family = fam.subfamily(&["star"]).or_fail("subfamily")?;
    let tree = &fam.tree;
    let star = fam.model("star").or_fail("star")?;
    let g = g_bounds(tree, star, 1.0, CertOptions::default()).or_fail("g_bounds")?;
    let root = tree.root();
    check!(g.at(tree, root) == 2.0, "G_1 = {}", g.at(tree, root));
    for &c in tree.children(root) {
        let expected = if star.increment(c)[0] < 0.0 { 4.0 } else { 18.0 };
        check!(g.at(tree, c) == expected, "G_2 = {} at {}, expected {expected}", g.at(tree, c), tree.path(c));
    }

    let field = SubspaceField::of_model(tree, star);
    let constraints = constraint_system(&star_family, 1.0, AdmissibilityMode::Intermediate);
    let mut rng = generator(7);
    let mut largest = [0.0f64; 2];
    for k in 0..1000 {
        let mut flat = vec![0.0; tree.internal_nodes().len()];
        let wealth1 = |phi: f64, c: usize| 1.0 + phi * star.increment(c)[0];
        loop {
            let phi = rng.gen_range(-3.0..3.0);
            if tree.children(root).iter().all(|&c| wealth1(phi, c) >= 0.0) {
                flat[0] = phi;
                break;
            }
        }
        for &c in tree.children(root) {
            let w = wealth1(flat[0], c);
            let r = 4.0 * w + 1e-9;
            loop {
                let phi = rng.gen_range(-r..r);
                if tree.children(c).iter().all(|&l| w + phi * star.increment(l)[0] >= 0.0) {
                    flat[tree.internal_index(c).unwrap()] = phi;
                    break;
                }
            }
        }
        check!(
            constraints.iter().all(|c| c.value(&flat) >= -1e-12),
            "sample {k} is not admissible"
        );
        let phi = Strategy::from_flat(tree, 1, &flat).or_fail("strategy")?;
        let projected = project_strategy(tree, &phi, &field).or_fail("project")?;
        for &n in tree.internal_nodes() {
            let norm = linalg::norm(projected.position(tree, n));
            let bound = g.at(tree, n);
            check!(norm <= bound * (1.0 + 1e-12), "sample {k}: |φ| = {norm} > G = {bound} at {}", tree.path(n));
            let t = tree.depth(n);
            largest[t] = largest[t].max(norm / bound);
        }
    }
    Ok(format!(
        "G_1 = 2, G_2 in {{4, 18}}; 1000 samples, largest |φ|/G = {:.4} (t = 1), {:.4} (t = 2)",
        largest[0], largest[1]
    ))
}

fn small_fixtures() -> Vec<(&'static str, ModelFamily)> {
    let (two_drift, _) = gen_two_drift().unwrap();
    vec![
        ("coin", common::coin()),
        ("two-model", common::two_model()),
        ("plane", common::plane()),
        ("bachelier", gen_bachelier(2, 0.5, 0.0, &[(1.0, 0.3)]).unwrap()),
        ("bachelier-pair", gen_bachelier(2, 0.5, 0.0, &[(1.0, 0.3), (1.0, -0.2)]).unwrap()),
        ("two-drift", two_drift),
    ]
}

fn oracle_equivalence() -> Outcome {
    const STEPS: usize = 401;
    let real_pl = UtilitySpec::piecewise_linear(vec![(-4.0, -8.0), (0.0, 0.0), (1.0, 0.7), (3.0, 1.5)])
        .unwrap()
        .with_domain(utility::Domain::Real);
    let cases = [
        (remark_pl(), AdmissibilityMode::Intermediate),
        (remark_pl(), AdmissibilityMode::TerminalOnly),
        (real_pl, AdmissibilityMode::Unconstrained),
    ];
    let mut compared = 0;
    let mut worst_ratio = 0.0f64;
    for (name, fam) in small_fixtures() {
        let reach = fam
            .models
            .iter()
            .flat_map(|m| market::wealth_coefficients(&fam.tree, m))
            .map(|e| e.iter().map(|(_, a)| a.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        for (u, mode) in &cases {
            let s = lp(&fam, u, 1.0, *mode)?;
            let radius = (1.1 * s.strategy.max_abs()).max(1.0);
            let o = brute_force_oracle(&fam, u, 1.0, *mode, radius, STEPS).or_fail("oracle")?;
            let slope = u
                .affine_pieces()
                .unwrap()
                .iter()
                .map(|p| p.1.abs())
                .fold(0.0, f64::max);
            let h = 2.0 * radius / (STEPS - 1) as f64;
            let tol = slope * h * reach;
            check!(o.value <= s.value + 1e-9, "{name} ({mode}): oracle {} beats LP {}", o.value, s.value);
            check!(
                s.value - o.value <= tol,
                "{name} ({mode}): LP {} vs oracle {} exceeds one grid step ({tol:e})",
                s.value,
                o.value
            );
            worst_ratio = worst_ratio.max((s.value - o.value) / tol);
            compared += 1;
        }
    }

    let log = UtilitySpec::log();
    let mut gaps = Vec::new();
    for (name, fam, w0) in [
        ("coin", common::coin(), 1.0),
        ("two-model", common::two_model(), 1.0),
        ("bachelier", gen_bachelier(2, 0.5, 0.0, &[(1.0, 0.3)]).unwrap(), 5.0),
    ] {
        let s = solve_supergradient(&fam, &log, w0, AdmissibilityMode::Intermediate, AscentOptions::default())
            .or_fail("supergradient")?;
        let gap = s.gap_bound.ok_or("no reference value")?;
        check!(gap <= 1e-3, "{name}: supergradient value {} is {gap:e} from the reference", s.value);
        gaps.push(gap);
    }
    Ok(format!(
        "{compared} LP/oracle pairs, largest gap {worst_ratio:.2} grid steps; log gaps {:.1e}, {:.1e}, {:.1e}",
        gaps[0], gaps[1], gaps[2]
    ))
}

fn mode_ordering() -> Outcome {
    let u = remark_pl();
    let mut fixtures = small_fixtures();
    fixtures.push(("remark", gen_remark_example(100.0, 201).or_fail("fixture")?));
    let (mut families, mut singletons, mut remark_gap) = (0, 0, 0.0);
    for (name, fam) in &fixtures {
        let int = lp(fam, &u, 1.0, AdmissibilityMode::Intermediate)?.value;
        let term = lp(fam, &u, 1.0, AdmissibilityMode::TerminalOnly)?.value;
        check!(int <= term + 1e-9, "{name}: intermediate {int} > terminal {term}");
        families += 1;
        if *name == "remark" {
            remark_gap = term - int;
            check!(remark_gap >= 0.23, "remark gap {remark_gap} < 0.23");
        }
        for m in &fam.models {
            if !na_check(&fam.tree, m).holds {
                continue;
            }
            let single = fam.subfamily(&[m.name.as_str()]).or_fail("subfamily")?;
            let a = lp(&single, &u, 1.0, AdmissibilityMode::Intermediate)?.value;
            let b = lp(&single, &u, 1.0, AdmissibilityMode::TerminalOnly)?.value;
            check!((a - b).abs() <= 1e-9, "{name}/{}: intermediate {a} vs terminal {b}", m.name);
            singletons += 1;
        }
    }
    Ok(format!(
        "{families} families ordered, {singletons} singletons equal, remark gap {remark_gap:.4}"
    ))
}

const FAMILIES: usize = 200;

fn robust_na_with_reference() -> Outcome {
    let (mut found, mut drawn) = (0, 0u64);
    while found < FAMILIES {
        let mut rng = substream(0xa5, drawn);
        drawn += 1;
        check!(drawn < 100 * FAMILIES as u64, "could not generate enough families");
        let tree = common::random_tree(&mut rng, 3, 4);
        let d = rng.gen_range(1..=2);
        let star = common::random_na_model(&mut rng, &tree, d, "m0", -2, 2);
        let mut models = vec![star.clone()];
        for j in 1..rng.gen_range(1..=3) {
            let name = format!("m{j}");
            models.push(if rng.gen_bool(0.3) {
                common::random_model(&mut rng, &tree, d, &name, -2, 2)
            } else {
                common::contained_model(&mut rng, &tree, &star, &name)
            });
        }
        let fam = ModelFamily::new(tree, models).or_fail("family")?;
        if assumption_na(&fam).or_fail("assumption")?.is_empty() {
            continue;
        }
        let v = robust_na(&fam).or_fail("robust_na")?;
        check!(v.holds, "family {drawn} fails robust NA (optimum {})", v.optimum);
        found += 1;
    }
    Ok(format!("{FAMILIES} families with a reference model, all robustly arbitrage free ({drawn} drawn)"))
}

fn robust_na_without_na_models() -> Outcome {
    let mut holding = Vec::new();
    let mut multi = 0;
    for i in 0..FAMILIES as u64 {
        let mut rng = substream(0xb6, i);
        let tree = common::random_tree(&mut rng, 3, 4);
        let d = rng.gen_range(1..=2);
        let count = rng.gen_range(1..=3);
        let mut models = Vec::new();
        while models.len() < count {
            let m = common::random_model(&mut rng, &tree, d, &format!("m{}", models.len()), -2, 2);
            if !na_check(&tree, &m).holds {
                models.push(m);
            }
        }
        multi += (count > 1) as usize;
        let fam = ModelFamily::new(tree, models).or_fail("family")?;
        let v = robust_na(&fam).or_fail("robust_na")?;
        let nonzero = v.witness.as_ref().is_some_and(|w| w.max_abs() > 0.0);
        if v.holds || !nonzero {
            holding.push((i, count));
        }
    }
    let single_free = holding.iter().filter(|h| h.1 == 1).count();
    check!(
        holding.is_empty(),
        "{} of {multi} multi-model families are robustly arbitrage free although every model fails na_check \
         (first at index {}); {} of {} single-model families",
        holding.len() - single_free,
        holding[0].0,
        single_free,
        FAMILIES - multi
    );
    Ok(format!("{FAMILIES} families, every one has a nonzero robust arbitrage"))
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    limit_secs: f64,
    run: fn() -> Outcome,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: "1", title: "remark value 5/4", limit_secs: 5.0, run: remark_value },
    Criterion { id: "2", title: "remark upper bound", limit_secs: 30.0, run: remark_upper_bound },
    Criterion { id: "3", title: "binomial martingale measure", limit_secs: 1.0, run: bachelier_emm },
    Criterion { id: "4", title: "time consistency", limit_secs: 1.0, run: time_consistency },
    Criterion { id: "5", title: "measure exists iff no arbitrage", limit_secs: 60.0, run: ftap },
    Criterion { id: "6", title: "certificate soundness", limit_secs: 60.0, run: certificate_soundness },
    Criterion { id: "7", title: "strategy bounds", limit_secs: 30.0, run: strategy_bounds },
    Criterion { id: "8", title: "oracle equivalence", limit_secs: 120.0, run: oracle_equivalence },
    Criterion { id: "9", title: "mode ordering", limit_secs: 30.0, run: mode_ordering },
    Criterion { id: "10a", title: "robust NA with a reference model", limit_secs: 60.0, run: robust_na_with_reference },
    Criterion { id: "10b", title: "robust arbitrage without NA models", limit_secs: 60.0, run: robust_na_without_na_models },
];

fn main() {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for c in CRITERIA {
        if !only.is_empty() && !only.iter().any(|o| o == c.id) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(detail) if secs > c.limit_secs => Err(format!("{detail}; exceeded {} s", c.limit_secs)),
            other => other,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        let note = if outcome.is_err() && KNOWN_RED.contains(&c.id) { " [known]" } else { "" };
        println!(
            "{status} {:>4}  {:<36} {:>7.2} s / {:>3} s  {detail}{note}",
            c.id, c.title, secs, c.limit_secs
        );
        if outcome.is_err() && !KNOWN_RED.contains(&c.id) {
            unexpected.push(c.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
