//! Exhaustive grid search, used to cross-check the solvers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{wealth_coefficients, ModelFamily, Strategy};
use crate::utility::UtilitySpec;

use super::{constraint_system, AdmissibilityMode};

pub const ORACLE_DIM_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub strategy: Strategy,
    pub evaluated: usize,
}

/// Best robust value over the grid of `steps` equally spaced points per
/// coordinate on `[-radius, radius]`, restricted to admissible strategies.
pub fn brute_force_oracle(
    family: &ModelFamily,
    u: &UtilitySpec,
    w0: f64,
    mode: AdmissibilityMode,
    radius: f64,
    steps: usize,
) -> Result<OracleResult> {
    let n = family.strategy_dims();
    if n > ORACLE_DIM_LIMIT {
        return Err(Error::TooManyDimensions {
            dims: n,
            limit: ORACLE_DIM_LIMIT,
        });
    }
    if steps < 2 || !(radius > 0.0) {
        return Err(Error::BadParameters("need steps >= 2 and a positive radius".into()));
    }
    let tree = &family.tree;
    let dense = |expr: &[(usize, f64)]| {
        let mut v = vec![0.0; n];
        for &(j, a) in expr {
            v[j] += a;
        }
        v
    };
    let rows: Vec<Vec<f64>> = constraint_system(family, w0, mode).iter().map(|c| dense(&c.coeffs)).collect();
    let models: Vec<Vec<(f64, Vec<f64>)>> = family
        .models
        .iter()
        .map(|m| {
            let c = wealth_coefficients(tree, m);
            tree.leaves().iter().map(|&l| (tree.prob(l), dense(&c[l]))).collect()
        })
        .collect();
    let axis: Vec<f64> = (0..steps)
        .map(|i| -radius + 2.0 * radius * i as f64 / (steps - 1) as f64)
        .collect();
    let dot = |a: &[f64], x: &[f64]| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();

    let mut idx = vec![0usize; n];
    let mut x = vec![axis[0]; n];
    let mut best = f64::NEG_INFINITY;
    let mut best_x = vec![0.0; n];
    let mut evaluated = 0;
    loop {
        if rows.iter().all(|r| w0 + dot(r, &x) >= 0.0) {
            evaluated += 1;
            let mut worst = f64::INFINITY;
            for leaves in &models {
                let mut total = 0.0;
                for (p, a) in leaves {
                    total += p * u.evaluate(w0 + dot(a, &x));
                }
                worst = worst.min(total);
                if worst <= best {
                    break;
                }
            }
            if worst > best {
                best = worst;
                best_x.copy_from_slice(&x);
            }
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == n {
                let strategy = Strategy::from_flat(tree, family.dim(), &best_x)?;
                return Ok(OracleResult {
                    value: best,
                    strategy,
                    evaluated,
                });
            }
            idx[k] += 1;
            if idx[k] < steps {
                x[k] = axis[idx[k]];
                break;
            }
            idx[k] = 0;
            x[k] = axis[0];
            k += 1;
        }
    }
}
