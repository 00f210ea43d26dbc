//! Robust expected-utility maximisation `sup_φ min_S E[U(W_T^S(w0, φ))]`.

mod ascent;
mod lp;
mod oracle;

pub use ascent::{pl_reference, solve_supergradient, AscentOptions};
pub use lp::{solve_lp, LpOptions};
pub use oracle::{brute_force_oracle, OracleResult, ORACLE_DIM_LIMIT};

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::row_key;
use crate::market::{wealth_coefficients, wealth_process, ModelFamily, Strategy};
use crate::space::NodeId;
use crate::utility::{Domain, UtilitySpec};

/// Which wealth paths must stay non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibilityMode {
    /// At every date, under every model.
    Intermediate,
    /// At the horizon only, under every model.
    TerminalOnly,
    /// No constraint; whole-line utilities.
    Unconstrained,
}

impl FromStr for AdmissibilityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intermediate" => Ok(Self::Intermediate),
            "terminal" | "terminal_only" => Ok(Self::TerminalOnly),
            "unconstrained" => Ok(Self::Unconstrained),
            _ => Err(Error::BadParameters(format!(
                "unknown mode `{s}` (expected intermediate, terminal or unconstrained)"
            ))),
        }
    }
}

impl fmt::Display for AdmissibilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Intermediate => "intermediate",
            Self::TerminalOnly => "terminal",
            Self::Unconstrained => "unconstrained",
        })
    }
}

/// `constant + Σ coeffs·φ >= 0` over flat strategy coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WealthConstraint {
    pub model: String,
    pub node: NodeId,
    pub coeffs: Vec<(usize, f64)>,
    pub constant: f64,
}

impl WealthConstraint {
    pub fn value(&self, flat: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|&(j, a)| a * flat[j]).sum::<f64>()
    }
}

/// One non-negativity constraint per (model, node) as required by `mode`.
pub fn constraint_system(family: &ModelFamily, w0: f64, mode: AdmissibilityMode) -> Vec<WealthConstraint> {
    let tree = &family.tree;
    let nodes: Vec<NodeId> = match mode {
        AdmissibilityMode::Unconstrained => return Vec::new(),
        AdmissibilityMode::TerminalOnly => tree.leaves().to_vec(),
        AdmissibilityMode::Intermediate => (1..tree.node_count()).collect(),
    };
    let mut out = Vec::new();
    for m in &family.models {
        let coeffs = wealth_coefficients(tree, m);
        for &n in &nodes {
            out.push(WealthConstraint {
                model: m.name.clone(),
                node: n,
                coeffs: coeffs[n].clone(),
                constant: w0,
            });
        }
    }
    out
}

/// Distinct `(coeffs, constant)` rows an optimiser must respect: the mode's
/// constraints plus terminal non-negativity when `U` lives on the half-line.
pub(crate) fn feasibility_rows(
    family: &ModelFamily,
    u: &UtilitySpec,
    w0: f64,
    mode: AdmissibilityMode,
) -> Vec<(Vec<(usize, f64)>, f64)> {
    let mut cons = constraint_system(family, w0, mode);
    if u.domain == Domain::Positive && mode == AdmissibilityMode::Unconstrained {
        cons = constraint_system(family, w0, AdmissibilityMode::TerminalOnly);
    }
    let mut seen = HashSet::new();
    cons.into_iter()
        .filter(|c| seen.insert(row_key(&c.coeffs)))
        .map(|c| (c.coeffs, c.constant))
        .collect()
}

/// Scales `flat` towards zero just enough that every row reaches `floor`.
/// Rows already violated at zero are left alone.
pub(crate) fn shrink_into(rows: &[(Vec<(usize, f64)>, f64)], flat: &mut [f64], floor: f64) {
    let mut lambda = 1.0f64;
    for (coeffs, constant) in rows {
        let s: f64 = coeffs.iter().map(|&(j, a)| a * flat[j]).sum();
        if constant + s < floor && *constant >= floor && s < 0.0 {
            lambda = lambda.min((constant - floor) / -s);
        }
    }
    if lambda < 1.0 {
        flat.iter_mut().for_each(|v| *v *= lambda);
    }
}

/// `E_P[U(W_T^S(w0, φ))]` for each model, in family order.
pub fn model_values(family: &ModelFamily, u: &UtilitySpec, w0: f64, phi: &Strategy) -> Result<Vec<f64>> {
    let tree = &family.tree;
    family
        .models
        .iter()
        .map(|m| {
            let w = wealth_process(tree, m, w0, phi)?;
            let mut total = 0.0;
            for &leaf in tree.leaves() {
                let v = u.evaluate(w.at(leaf));
                if v == f64::NEG_INFINITY {
                    return Ok(f64::NEG_INFINITY);
                }
                total += tree.prob(leaf) * v;
            }
            Ok(total)
        })
        .collect()
}

/// `min_S E_P[U(W_T^S(w0, φ))]`, `-∞` as soon as one scenario is outside
/// the domain.
pub fn evaluate_robust(family: &ModelFamily, u: &UtilitySpec, w0: f64, phi: &Strategy) -> Result<f64> {
    Ok(model_values(family, u, w0, phi)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lp,
    Supergradient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustSolution {
    pub strategy: Strategy,
    /// `min_S E[U(W_T^S)]` at `strategy`.
    pub value: f64,
    /// Per-model expected utilities, in family order.
    pub model_values: Vec<f64>,
    /// Models attaining the minimum.
    pub worst_models: Vec<String>,
    pub method: Method,
    /// Distance to the reference LP value (supergradient only).
    pub gap_bound: Option<f64>,
    /// The optimiser sits on the artificial box of the unconstrained mode.
    pub touches_box: bool,
}

pub(crate) fn solution(
    family: &ModelFamily,
    u: &UtilitySpec,
    w0: f64,
    strategy: Strategy,
    method: Method,
) -> Result<RobustSolution> {
    let values = model_values(family, u, w0, &strategy)?;
    let value = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = if value.is_finite() { 1e-9 * (1.0 + value.abs()) } else { 0.0 };
    let worst_models = family
        .models
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v <= value + tol)
        .map(|(m, _)| m.name.clone())
        .collect();
    Ok(RobustSolution {
        strategy,
        value,
        model_values: values,
        worst_models,
        method,
        gap_bound: None,
        touches_box: false,
    })
}
