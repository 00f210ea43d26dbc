//! Equivalent martingale measures on the tree.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram, Sense};
use crate::market::PriceModel;
use crate::space::{FilteredTree, Measure, NodeId, RandomVariable};

/// Drift tolerance for martingale checks.
pub const MARTINGALE_TOL: f64 = 1e-9;
/// Smallest minimum weight ratio accepted as an equivalent measure.
const DELTA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmmResult {
    pub model: String,
    pub measure: Measure,
    /// `K* = max dQ/dP`.
    pub density_bound: f64,
    /// `min q / p` achieved by the measure.
    pub delta: f64,
}

/// Martingale measure maximising the smallest ratio `q / p` over leaves.
pub fn find_emm(tree: &FilteredTree, model: &PriceModel) -> Result<EmmResult> {
    let base = tree.base_measure();
    let mut lp = LinearProgram::new(Sense::Maximize);
    let delta = lp.add_var(1.0, 0.0, f64::INFINITY);
    let q: Vec<usize> = (0..tree.leaf_count()).map(|_| lp.add_var(0.0, 0.0, 1.0)).collect();
    for (i, &v) in q.iter().enumerate() {
        lp.add_row(vec![(v, 1.0), (delta, -base.weights[i])], Cmp::Ge, 0.0);
    }
    lp.add_row(q.iter().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0);
    for &n in tree.internal_nodes() {
        for j in 0..model.dim() {
            let mut row = Vec::new();
            for &c in tree.children(n) {
                let a = model.increment(c)[j];
                if a != 0.0 {
                    let (lo, hi) = tree.leaf_range(c);
                    row.extend((lo..hi).map(|l| (q[l], a)));
                }
            }
            if !row.is_empty() {
                lp.add_row(row, Cmp::Eq, 0.0);
            }
        }
    }
    let sol = match lp.solve() {
        Ok(sol) => sol,
        Err(crate::lp::LpError::Infeasible) => return Err(Error::ArbitrageInModel(model.name.clone())),
        Err(e) => return Err(Error::Numeric(format!("martingale measure program: {e}"))),
    };
    if sol.x[delta] <= DELTA_TOL {
        return Err(Error::ArbitrageInModel(model.name.clone()));
    }
    // Clean solver noise, then renormalise.
    let mut weights: Vec<f64> = q.iter().map(|&v| sol.x[v].max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let measure = Measure::new(weights)?;
    let density_bound = measure
        .weights
        .iter()
        .zip(&base.weights)
        .map(|(q, p)| q / p)
        .fold(0.0, f64::max);
    let delta = measure
        .weights
        .iter()
        .zip(&base.weights)
        .map(|(q, p)| q / p)
        .fold(f64::INFINITY, f64::min);
    Ok(EmmResult {
        model: model.name.clone(),
        measure,
        density_bound,
        delta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleCheck {
    pub holds: bool,
    pub max_drift: f64,
    pub worst_node: Option<NodeId>,
}

/// Largest norm of the conditional mean increment under `q`.
pub fn verify_martingale(tree: &FilteredTree, model: &PriceModel, q: &Measure, tol: f64) -> Result<MartingaleCheck> {
    if q.len() != tree.leaf_count() {
        return Err(Error::SizeMismatch {
            expected: tree.leaf_count(),
            got: q.len(),
        });
    }
    let mut max_drift = 0.0;
    let mut worst_node = None;
    for &n in tree.internal_nodes() {
        let mass = q.mass(tree, n);
        if mass <= 0.0 {
            continue;
        }
        let mut mean = vec![0.0; model.dim()];
        for &c in tree.children(n) {
            let w = q.mass(tree, c) / mass;
            for (m, a) in mean.iter_mut().zip(model.increment(c)) {
                *m += w * a;
            }
        }
        let drift = crate::linalg::norm(&mean);
        if drift > max_drift {
            max_drift = drift;
            worst_node = Some(n);
        }
    }
    Ok(MartingaleCheck {
        holds: max_drift <= tol,
        max_drift,
        worst_node,
    })
}

/// `Q({ω}) = 2^{-T} Π_t (1 - ε_t μ/σ)` on the binary tree with the up move
/// (`ε = +1`) first at every node.
pub fn bachelier_emm_closed_form(horizon: usize, sigma: f64, mu: f64) -> Result<Measure> {
    if !(sigma > 0.0) || !(mu.abs() < sigma) {
        return Err(Error::DriftDominatesVolatility { sigma, mu });
    }
    let theta = mu / sigma;
    let weights = (0..1usize << horizon)
        .map(|leaf| {
            (0..horizon)
                .map(|t| {
                    let down = (leaf >> (horizon - 1 - t)) & 1 == 1;
                    let eps = if down { -1.0 } else { 1.0 };
                    0.5 * (1.0 - eps * theta)
                })
                .product()
        })
        .collect();
    Measure::new(weights)
}

/// Leaf-wise Radon-Nikodym density `q / p`.
pub fn density(q: &Measure, p: &Measure) -> Result<RandomVariable> {
    if q.len() != p.len() {
        return Err(Error::SizeMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    if !p.is_equivalent() {
        return Err(Error::BaseNotFullSupport);
    }
    Ok(RandomVariable(q.weights.iter().zip(&p.weights).map(|(a, b)| a / b).collect()))
}
