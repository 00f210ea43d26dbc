//! Exact epigraph program for piecewise-linear utilities.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lp::{row_key, Backend, Cmp, LinearProgram, LpError, Sense};
use crate::market::{wealth_coefficients, ModelFamily, Strategy};
use crate::utility::UtilitySpec;

use super::{feasibility_rows, shrink_into, solution, AdmissibilityMode, Method, RobustSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// `‖φ‖_∞` bound imposed in the unconstrained mode.
    pub box_bound: f64,
    pub backend: Backend,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            box_bound: 1e4,
            backend: Backend::Auto,
        }
    }
}

/// Maximises `τ` subject to `τ <= Σ_ω P(ω) u_{S,ω}` for every model,
/// `u_{S,ω} <= a_k + b_k W_T^S(ω)` for every affine piece of `U`, and the
/// admissibility constraints of `mode`.
pub fn solve_lp(
    family: &ModelFamily,
    u: &UtilitySpec,
    w0: f64,
    mode: AdmissibilityMode,
    opts: LpOptions,
) -> Result<RobustSolution> {
    let pieces = u
        .affine_pieces()
        .ok_or_else(|| Error::BadParameters(format!("the exact solver needs a piecewise-linear utility, got `{u}`")))?;
    let tree = &family.tree;
    let n = family.strategy_dims();
    let unconstrained = mode == AdmissibilityMode::Unconstrained;
    let bound = if unconstrained { opts.box_bound } else { f64::INFINITY };

    let mut lp = LinearProgram::new(Sense::Maximize);
    for _ in 0..n {
        lp.add_var(0.0, -bound, bound);
    }
    let tau = lp.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY);
    for model in &family.models {
        let coeffs = wealth_coefficients(tree, model);
        // Scenarios with the same wealth expression share one epigraph variable.
        let mut merged: HashMap<Vec<(usize, u64)>, (usize, f64)> = HashMap::new();
        let mut order = Vec::new();
        for &leaf in tree.leaves() {
            let key = row_key(&coeffs[leaf]);
            let p = tree.prob(leaf);
            match merged.get_mut(&key) {
                Some(e) => e.1 += p,
                None => {
                    let v = lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
                    merged.insert(key, (v, p));
                    order.push((leaf, v));
                }
            }
        }
        let mut row = vec![(tau, 1.0)];
        for &(leaf, v) in &order {
            let p = merged[&row_key(&coeffs[leaf])].1;
            row.push((v, -p));
            for &(a, b) in &pieces {
                // u - b Σ c φ <= a + b w0
                let mut r = vec![(v, 1.0)];
                if b != 0.0 {
                    r.extend(coeffs[leaf].iter().map(|&(j, c)| (j, -b * c)));
                }
                lp.add_row(r, Cmp::Le, a + b * w0);
            }
        }
        lp.add_row(row, Cmp::Le, 0.0);
    }
    for (coeffs, constant) in feasibility_rows(family, u, w0, mode) {
        if coeffs.is_empty() {
            if constant < 0.0 {
                return Err(Error::Infeasible);
            }
            continue;
        }
        lp.add_row(coeffs, Cmp::Ge, -constant);
    }

    let sol = lp.solve_with(opts.backend).map_err(|e| match e {
        LpError::Infeasible => Error::Infeasible,
        LpError::Unbounded => Error::Unbounded,
        LpError::Numeric(m) => Error::Numeric(m),
    })?;
    let mut flat = sol.x[..n].to_vec();
    if !unconstrained || u.domain == crate::utility::Domain::Positive {
        // A small floor absorbs the rounding between row sums and the
        // node-by-node wealth recursion.
        shrink_into(&feasibility_rows(family, u, w0, mode), &mut flat, 1e-12 * w0.abs());
    }
    let strategy = Strategy::from_flat(tree, family.dim(), &flat)?;
    let mut out = solution(family, u, w0, strategy, Method::Lp)?;
    out.touches_box = unconstrained && out.strategy.max_abs() >= opts.box_bound * (1.0 - 1e-9);
    Ok(out)
}
