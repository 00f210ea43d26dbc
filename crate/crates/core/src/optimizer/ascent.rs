//! Projected supergradient ascent for utilities that are not piecewise
//! linear, with a reference value from a refined piecewise-linear program.

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::market::{wealth_coefficients, ModelFamily, Strategy};
use crate::utility::{pl_under_approximation, Domain, UtilitySpec};

use super::lp::{solve_lp, LpOptions};
use super::{feasibility_rows, shrink_into, solution, AdmissibilityMode, Method, RobustSolution};

const DYKSTRA_SWEEPS: usize = 200;
const DYKSTRA_TOL: f64 = 1e-10;
/// Wealth floor, relative to `w0`, kept by iterates under half-line utilities.
const FLOOR_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub iters: usize,
    /// First step length; by default half of `w0` divided by the largest
    /// increment norm.
    pub step0: Option<f64>,
    /// Target chord gap of the piecewise-linear reference utility.
    pub gap_tol: f64,
    pub box_bound: f64,
    /// Solve the reference program and report `gap_bound`.
    pub reference: bool,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            iters: 4000,
            step0: None,
            gap_tol: 1e-4,
            box_bound: 1e4,
            reference: true,
        }
    }
}

type SparseExpr = Vec<(usize, f64)>;

struct Compiled {
    /// Per model: `(probability, sparse wealth expression)` per leaf.
    leaves: Vec<Vec<(f64, SparseExpr)>>,
    names: Vec<String>,
}

impl Compiled {
    fn new(family: &ModelFamily) -> Self {
        let tree = &family.tree;
        let leaves = family
            .models
            .iter()
            .map(|m| {
                let c = wealth_coefficients(tree, m);
                tree.leaves().iter().map(|&l| (tree.prob(l), c[l].clone())).collect()
            })
            .collect();
        Self {
            leaves,
            names: family.models.iter().map(|m| m.name.clone()).collect(),
        }
    }

    fn value(&self, m: usize, u: &UtilitySpec, w0: f64, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (p, expr) in &self.leaves[m] {
            let w = w0 + expr.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
            total += p * u.evaluate(w);
        }
        total
    }

    fn gradient(&self, m: usize, u: &UtilitySpec, w0: f64, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        for (p, expr) in &self.leaves[m] {
            let w = w0 + expr.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
            let s = p * u.supergradient(w)?;
            for &(j, a) in expr {
                g[j] += s * a;
            }
        }
        Ok(g)
    }
}

struct Feasible {
    rows: Vec<(Vec<(usize, f64)>, f64)>,
    floor: f64,
    bound: f64,
}

impl Feasible {
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.abs() <= self.bound)
            && self
                .rows
                .iter()
                .all(|(a, c)| c + a.iter().map(|&(j, v)| v * x[j]).sum::<f64>() >= self.floor)
    }

    /// Dykstra's alternating projections onto the half-spaces and the box,
    /// followed by a radial shrink that removes any residual violation.
    fn project(&self, x0: &[f64]) -> Vec<f64> {
        if self.contains(x0) {
            return x0.to_vec();
        }
        let n = x0.len();
        let mut x = x0.to_vec();
        let mut incr = vec![vec![0.0; n]; self.rows.len() + 1];
        for _ in 0..DYKSTRA_SWEEPS {
            let prev = x.clone();
            for (i, (a, c)) in self.rows.iter().enumerate() {
                let z: Vec<f64> = x.iter().zip(&incr[i]).map(|(a, b)| a + b).collect();
                let mut p = z.clone();
                let lhs = c + a.iter().map(|&(j, v)| v * z[j]).sum::<f64>();
                if lhs < self.floor {
                    let nn: f64 = a.iter().map(|&(_, v)| v * v).sum();
                    let t = (self.floor - lhs) / nn;
                    for &(j, v) in a {
                        p[j] += t * v;
                    }
                }
                incr[i] = z.iter().zip(&p).map(|(a, b)| a - b).collect();
                x = p;
            }
            let k = self.rows.len();
            let z: Vec<f64> = x.iter().zip(&incr[k]).map(|(a, b)| a + b).collect();
            let p: Vec<f64> = z.iter().map(|v| v.clamp(-self.bound, self.bound)).collect();
            incr[k] = z.iter().zip(&p).map(|(a, b)| a - b).collect();
            x = p;
            let moved = norm(&x.iter().zip(&prev).map(|(a, b)| a - b).collect::<Vec<_>>());
            if moved < DYKSTRA_TOL {
                break;
            }
        }
        shrink_into(&self.rows, &mut x, self.floor);
        x
    }
}

/// Projected supergradient ascent on `φ ↦ min_S E[U(W_T^S)]`, starting from
/// the safe portfolio, with steps `step0 / √k` along the normalised
/// supergradient of the first worst model. Returns the best iterate.
pub fn solve_supergradient(
    family: &ModelFamily,
    u: &UtilitySpec,
    w0: f64,
    mode: AdmissibilityMode,
    opts: AscentOptions,
) -> Result<RobustSolution> {
    if opts.iters == 0 {
        return Err(Error::BadParameters("at least one iteration is required".into()));
    }
    let positive = u.domain == Domain::Positive;
    let floor = if positive { FLOOR_FRACTION * w0 } else { 0.0 };
    let rows = feasibility_rows(family, u, w0, mode);
    let bound = if mode == AdmissibilityMode::Unconstrained { opts.box_bound } else { f64::INFINITY };
    if (positive && !(w0 > 0.0)) || (!rows.is_empty() && w0 < floor) || !u.evaluate(w0).is_finite() {
        return Err(Error::DomainViolationAtStart { w0 });
    }
    let set = Feasible { rows, floor, bound };
    let comp = Compiled::new(family);
    let n = family.strategy_dims();
    let step0 = opts.step0.unwrap_or_else(|| {
        let scale = family
            .models
            .iter()
            .flat_map(|m| m.increments.iter().map(|v| norm(v)))
            .fold(0.0, f64::max);
        if scale > 0.0 {
            0.5 * w0.abs().max(1.0) / scale
        } else {
            1.0
        }
    });

    let robust = |x: &[f64]| -> (f64, usize) {
        let mut best = (f64::INFINITY, 0usize);
        for m in 0..comp.names.len() {
            let v = comp.value(m, u, w0, x);
            let tie = (v - best.0).abs() <= 1e-12 * (1.0 + v.abs()) && comp.names[m] < comp.names[best.1];
            if v < best.0 || tie {
                best = (v, m);
            }
        }
        best
    };

    let mut x = vec![0.0; n];
    let (mut best_val, _) = robust(&x);
    let mut best_x = x.clone();
    for k in 1..=opts.iters {
        let (v, m) = robust(&x);
        if v > best_val {
            best_val = v;
            best_x = x.clone();
        }
        let g = comp.gradient(m, u, w0, &x)?;
        let gn = norm(&g);
        if gn == 0.0 {
            break;
        }
        let step = step0 / (k as f64).sqrt();
        let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b / gn).collect();
        x = set.project(&trial);
    }
    let (v, _) = robust(&x);
    if v > best_val {
        best_x = x;
    }
    let strategy = Strategy::from_flat(&family.tree, family.dim(), &best_x)?;
    let mut out = solution(family, u, w0, strategy, Method::Supergradient)?;
    out.touches_box = mode == AdmissibilityMode::Unconstrained && out.strategy.max_abs() >= opts.box_bound * (1.0 - 1e-9);
    if opts.reference {
        let (reference, _) = pl_reference(family, u, w0, mode, opts.gap_tol, opts.box_bound)?;
        out.gap_bound = Some((out.value - reference).abs());
    }
    Ok(out)
}

fn grid(lo: f64, hi: f64, n: usize, w0: f64, geometric: bool) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            if geometric {
                lo * (hi / lo).powf(t)
            } else {
                lo + (hi - lo) * t
            }
        })
        .collect();
    pts.push(w0);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    pts
}

/// Exact LP value for a chord under-approximation of `u` whose gap is at
/// most `tol` on a wealth range that covers the LP optimiser's terminal
/// wealth. Piecewise-linear utilities are solved as they are.
pub fn pl_reference(
    family: &ModelFamily,
    u: &UtilitySpec,
    w0: f64,
    mode: AdmissibilityMode,
    tol: f64,
    box_bound: f64,
) -> Result<(f64, RobustSolution)> {
    let opts = LpOptions {
        box_bound,
        ..Default::default()
    };
    if u.is_piecewise_linear() {
        let s = solve_lp(family, u, w0, mode, opts)?;
        return Ok((s.value, s));
    }
    let positive = u.domain == Domain::Positive;
    let spread = 10.0 * (1.0 + w0.abs());
    let (mut lo, mut hi) = if positive { (w0 * 1e-2, w0 * 1e2) } else { (w0 - spread, w0 + spread) };
    let mut last = None;
    for _ in 0..8 {
        let mut n = 16;
        let pl = loop {
            let (pl, gap) = pl_under_approximation(u, &grid(lo, hi, n, w0, positive))?;
            if gap <= tol || n >= 1 << 14 {
                break pl;
            }
            n *= 2;
        };
        let sol = solve_lp(family, &pl, w0, mode, opts)?;
        let (wmin, wmax) = terminal_range(family, w0, &sol.strategy)?;
        last = Some((sol.value, sol));
        if wmin >= lo && wmax <= hi {
            break;
        }
        if wmin < lo {
            lo = if positive { lo / 10.0 } else { lo - (hi - lo) };
        }
        if wmax > hi {
            hi = if positive { hi * 10.0 } else { hi + (hi - lo) };
        }
    }
    Ok(last.expect("at least one pass"))
}

fn terminal_range(family: &ModelFamily, w0: f64, phi: &Strategy) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for m in &family.models {
        let w = crate::market::wealth_process(&family.tree, m, w0, phi)?;
        for &l in family.tree.leaves() {
            lo = lo.min(w.at(l));
            hi = hi.max(w.at(l));
        }
    }
    Ok((lo, hi))
}
