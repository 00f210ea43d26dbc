use std::fmt::Write as _;

use robustlab_core::io::market_to_json;
use robustlab_core::*;
use serde_json::{json, Value};

use crate::{Cli, Command, ExampleKind, MethodArg, OptimizeArgs};

/// What a command prints, and whether its verdict holds.
pub struct Report {
    pub text: String,
    pub json: Value,
    pub verdict: bool,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Self { text, json, verdict: true }
    }
}

/// Lists at most this many node paths in text output.
const MAX_LISTED: usize = 10;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialise")
}

fn listed(paths: &[String]) -> String {
    let mut s = paths.iter().take(MAX_LISTED).cloned().collect::<Vec<_>>().join(", ");
    if paths.len() > MAX_LISTED {
        let _ = write!(s, " and {} more", paths.len() - MAX_LISTED);
    }
    s
}

fn load(cli: &Cli) -> Result<ModelFamily> {
    let path = cli
        .market
        .as_ref()
        .ok_or_else(|| Error::BadParameters("this command needs --market PATH".into()))?;
    load_market(path)
}

fn selected<'a>(family: &'a ModelFamily, name: &Option<String>) -> Result<Vec<&'a PriceModel>> {
    match name {
        Some(n) => Ok(vec![family.model(n)?]),
        None => Ok(family.models.iter().collect()),
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    let opts = CertOptions { seed: cli.seed };
    match &cli.command {
        Command::Example { which, out } => example(which, out.as_deref()),
        Command::CheckNa => check_na(&load(cli)?),
        Command::RobustNa => robust(&load(cli)?),
        Command::Certificates { model } => certs(&load(cli)?, model, opts),
        Command::Emm { model } => emm(&load(cli)?, model, cli.tol),
        Command::Bounds { model, w0 } => bounds(&load(cli)?, model, *w0, opts),
        Command::Optimize(args) => optimize(&load(cli)?, args),
        Command::Evaluate { utility, w0, strategy } => evaluate(&load(cli)?, utility, *w0, strategy),
        Command::TimeConsistency => time_consistency(&load(cli)?),
        Command::Hypotheses { utility, w0, mode } => hypotheses(&load(cli)?, utility, *w0, *mode, opts),
    }
}

fn example(which: &ExampleKind, out: Option<&std::path::Path>) -> Result<Report> {
    let family = match which {
        ExampleKind::Coin => gen_bachelier(1, 0.5, 0.0, &[(1.0, 0.0)])?,
        ExampleKind::Bachelier { horizon, p, s0, thetas } => {
            let parsed = thetas
                .iter()
                .map(|t| {
                    let bad = || Error::BadParameters(format!("theta `{t}` is not `sigma:mu`"));
                    let (s, m) = t.split_once(':').ok_or_else(bad)?;
                    Ok((s.trim().parse().map_err(|_| bad())?, m.trim().parse().map_err(|_| bad())?))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            gen_bachelier(*horizon, *p, *s0, &parsed)?
        }
        ExampleKind::Remark { m, n } => gen_remark_example(*m, *n)?,
        ExampleKind::TwoDrift => gen_two_drift()?.0,
    };
    let value = market_to_json(&family)?;
    let text = match out {
        Some(path) => {
            save_market(&family, path)?;
            format!(
                "wrote {} ({} models, {} nodes, horizon {})\n",
                path.display(),
                family.models.len(),
                family.tree.node_count(),
                family.tree.horizon()
            )
        }
        None => serde_json::to_string_pretty(&value).expect("JSON values serialise") + "\n",
    };
    Ok(Report::ok(text, value))
}

fn check_na(family: &ModelFamily) -> Result<Report> {
    let tree = &family.tree;
    let mut text = String::new();
    let mut models = Vec::new();
    let mut all = true;
    for m in &family.models {
        let r = na_check(tree, m);
        let paths: Vec<String> = r.violations.iter().map(|&n| tree.path(n)).collect();
        if r.holds {
            let _ = writeln!(text, "{}: no arbitrage", m.name);
        } else {
            let _ = writeln!(text, "{}: arbitrage at {}", m.name, listed(&paths));
        }
        all &= r.holds;
        models.push(json!({ "model": m.name, "holds": r.holds, "violations": paths }));
    }
    Ok(Report {
        text,
        json: json!({ "holds": all, "models": models }),
        verdict: all,
    })
}

fn positions_text(tree: &FilteredTree, phi: &Strategy, skip_zero: bool) -> String {
    let mut text = String::new();
    for &n in tree.internal_nodes() {
        let pos = phi.position(tree, n);
        if skip_zero && pos.iter().all(|&x| x == 0.0) {
            continue;
        }
        let _ = writeln!(text, "  {:<16} {:?}", tree.path(n), pos);
    }
    text
}

fn positions_json(tree: &FilteredTree, phi: &Strategy) -> Value {
    tree.internal_nodes()
        .iter()
        .map(|&n| json!({ "node": tree.path(n), "position": phi.position(tree, n) }))
        .collect()
}

fn robust(family: &ModelFamily) -> Result<Report> {
    let v = robust_na(family)?;
    let tree = &family.tree;
    let mut text = if v.holds {
        format!("robust no-arbitrage holds (optimum {})\n", v.optimum)
    } else {
        format!("robust arbitrage found (optimum {})\n", v.optimum)
    };
    if let Some(w) = &v.witness {
        text.push_str("witness (non-zero positions):\n");
        text.push_str(&positions_text(tree, w, true));
    }
    let json = json!({
        "holds": v.holds,
        "optimum": v.optimum,
        "witness": v.witness.as_ref().map(|w| positions_json(tree, w)),
    });
    Ok(Report {
        text,
        json,
        verdict: v.holds,
    })
}

fn certs(family: &ModelFamily, model: &Option<String>, opts: CertOptions) -> Result<Report> {
    let mut text = String::new();
    let mut out = Vec::new();
    let mut all = true;
    for m in selected(family, model)? {
        let c = certificates(&family.tree, m, opts)?;
        let _ = writeln!(text, "{}: {}", m.name, if c.na { "no arbitrage" } else { "arbitrage" });
        let _ = writeln!(text, "  {:<16} {:>6} {:>4} {:>14} {:>10}", "node", "period", "dim", "beta", "kappa");
        for n in &c.nodes {
            let _ = writeln!(
                text,
                "  {:<16} {:>6} {:>4} {:>14.6e} {:>10.6}{}",
                n.path,
                n.period,
                n.support_dim,
                n.beta,
                n.kappa,
                if n.one_step_na { "" } else { "  arbitrage" }
            );
        }
        all &= c.na;
        out.push(to_value(&c));
    }
    Ok(Report {
        text,
        json: json!({ "holds": all, "certificates": out }),
        verdict: all,
    })
}

fn emm(family: &ModelFamily, model: &Option<String>, tol: f64) -> Result<Report> {
    let tree = &family.tree;
    let mut text = String::new();
    let mut out = Vec::new();
    let mut all = true;
    for m in selected(family, model)? {
        match find_emm(tree, m) {
            Ok(e) => {
                let check = verify_martingale(tree, m, &e.measure, tol)?;
                let _ = writeln!(
                    text,
                    "{}: K* = {}, min q/p = {}, max drift = {:e}",
                    m.name, e.density_bound, e.delta, check.max_drift
                );
                for (&leaf, w) in tree.leaves().iter().zip(&e.measure.weights) {
                    let _ = writeln!(text, "  {:<16} {}", tree.path(leaf), w);
                }
                all &= check.holds;
                out.push(json!({
                    "model": m.name,
                    "exists": true,
                    "weights": e.measure.weights,
                    "density_bound": e.density_bound,
                    "delta": e.delta,
                    "martingale": check.holds,
                    "max_drift": check.max_drift,
                }));
            }
            Err(Error::ArbitrageInModel(_)) => {
                let _ = writeln!(text, "{}: no equivalent martingale measure", m.name);
                all = false;
                out.push(json!({ "model": m.name, "exists": false }));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Report {
        text,
        json: json!({ "holds": all, "measures": out }),
        verdict: all,
    })
}

fn bounds(family: &ModelFamily, model: &Option<String>, w0: f64, opts: CertOptions) -> Result<Report> {
    let name = match model {
        Some(n) => n.clone(),
        None => assumption_na(family)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::BadParameters("no reference model; pass --model".into()))?,
    };
    let tree = &family.tree;
    let b = g_bounds(tree, family.model(&name)?, w0, opts)?;
    let mut text = format!("{name}, w0 = {w0}\n");
    let mut nodes = Vec::new();
    for &n in tree.internal_nodes() {
        let g = b.at(tree, n);
        let _ = writeln!(text, "  {:<16} period {:>2}  G = {}", tree.path(n), tree.depth(n) + 1, g);
        nodes.push(json!({ "node": tree.path(n), "period": tree.depth(n) + 1, "bound": g }));
    }
    Ok(Report::ok(text, json!({ "model": name, "w0": w0, "bounds": nodes })))
}

fn solution_report(family: &ModelFamily, s: &RobustSolution) -> Report {
    let tree = &family.tree;
    let mut text = format!("value {}\n", s.value);
    let _ = writeln!(text, "worst models: {}", s.worst_models.join(", "));
    for (m, v) in family.models.iter().zip(&s.model_values) {
        let _ = writeln!(text, "  {:<16} {}", m.name, v);
    }
    if let Some(g) = s.gap_bound {
        let _ = writeln!(text, "gap to reference: {g:e}");
    }
    if s.touches_box {
        text.push_str("warning: the optimiser sits on the position bound\n");
    }
    text.push_str("strategy:\n");
    text.push_str(&positions_text(tree, &s.strategy, false));
    let json = json!({
        "value": s.value,
        "method": to_value(&s.method),
        "worst_models": s.worst_models,
        "model_values": family
            .models
            .iter()
            .zip(&s.model_values)
            .map(|(m, v)| json!({ "model": m.name, "value": v }))
            .collect::<Vec<_>>(),
        "gap_bound": s.gap_bound,
        "touches_box": s.touches_box,
        "strategy": positions_json(tree, &s.strategy),
    });
    Report::ok(text, json)
}

fn optimize(family: &ModelFamily, args: &OptimizeArgs) -> Result<Report> {
    let s = match args.method {
        MethodArg::Lp => solve_lp(
            family,
            &args.utility,
            args.w0,
            args.mode,
            LpOptions {
                box_bound: args.box_bound,
                ..Default::default()
            },
        )?,
        MethodArg::Supergradient => solve_supergradient(
            family,
            &args.utility,
            args.w0,
            args.mode,
            AscentOptions {
                iters: args.iters,
                box_bound: args.box_bound,
                ..Default::default()
            },
        )?,
    };
    Ok(solution_report(family, &s))
}

fn parse_strategy(family: &ModelFamily, text: &str) -> Result<Strategy> {
    let per_depth = text
        .split(';')
        .map(|period| {
            period
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::BadParameters(format!("`{x}` in strategy `{text}` is not a number")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = per_depth.iter().find(|p| p.len() != family.dim()) {
        return Err(Error::SizeMismatch {
            expected: family.dim(),
            got: bad.len(),
        });
    }
    Strategy::per_depth(&family.tree, &per_depth)
}

fn evaluate(family: &ModelFamily, u: &UtilitySpec, w0: f64, strategy: &str) -> Result<Report> {
    let phi = parse_strategy(family, strategy)?;
    let values = model_values(family, u, w0, &phi)?;
    let value = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut text = format!("robust value {value}\n");
    for (m, v) in family.models.iter().zip(&values) {
        let _ = writeln!(text, "  {:<16} {}", m.name, v);
    }
    let json = json!({
        "value": value,
        "model_values": family
            .models
            .iter()
            .zip(&values)
            .map(|(m, v)| json!({ "model": m.name, "value": v }))
            .collect::<Vec<_>>(),
    });
    Ok(Report::ok(text, json))
}

fn time_consistency(family: &ModelFamily) -> Result<Report> {
    let laws: Vec<PathLaw> = family.models.iter().map(|m| PathLaw::of_model(&family.tree, m)).collect();
    let v = time_consistency_check(&laws)?;
    let witness = v.witness.as_ref().map(|w| w.describe());
    let text = match &witness {
        None => format!("consistent ({} recombinations checked)\n", v.recombinations_checked),
        Some(w) => format!("not consistent: {w} is not in the family\n"),
    };
    Ok(Report {
        text,
        json: json!({
            "consistent": v.consistent,
            "witness": witness,
            "recombinations_checked": v.recombinations_checked,
        }),
        verdict: v.consistent,
    })
}

fn hypotheses(
    family: &ModelFamily,
    u: &UtilitySpec,
    w0: f64,
    mode: AdmissibilityMode,
    opts: CertOptions,
) -> Result<Report> {
    let r = hypothesis_report(family, u, w0, mode, opts)?;
    let mut text = format!(
        "reference models: {}\n",
        if r.reference_models.is_empty() { "none".to_string() } else { r.reference_models.join(", ") }
    );
    for set in &r.sets {
        let _ = writeln!(text, "{}: {}", set.name, if set.holds { "holds" } else { "fails" });
        for c in &set.conditions {
            let _ = writeln!(text, "  [{}] {:<28} {}", if c.holds { "x" } else { " " }, c.name, c.detail);
        }
    }
    Ok(Report::ok(text, to_value(&r)))
}
