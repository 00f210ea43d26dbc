//! Which existence results apply to a concrete instance.
//!
//! Four hypothesis sets are checked:
//!
//! * `half_line_bounded`: some model is arbitrage-free with supports
//!   containing all others, `U` lives on the half-line and is bounded above,
//!   `w0 > 0`, intermediate admissibility.
//! * `half_line_integrable`: as above without boundedness; the integrability
//!   of `1/β` is automatic on a finite tree.
//! * `real_line_bounded`: such a model exists, `U` is finite on the whole line
//!   and bounded above.
//! * `real_line_growth`: every model qualifies as such a reference model, `U`
//!   is finite on the whole line and satisfies `U(x) <= C (x^α + 1)`.

use serde::Serialize;

use crate::arbitrage::{assumption_na, certificates, CertOptions};
use crate::error::Result;
use crate::linalg::norm;
use crate::market::ModelFamily;
use crate::optimizer::AdmissibilityMode;
use crate::utility::{check_growth, Domain, UtilitySpec};

pub const GROWTH_ALPHAS: [f64; 6] = [0.0, 0.25, 0.5, 0.75, 0.9, 0.99];
pub const GROWTH_CONSTANTS: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 100.0, 1000.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthCertificate {
    pub c: f64,
    pub alpha: f64,
    pub verified_grid: Vec<f64>,
}

/// First `(C, α)` from the search grid, `α` varying slowest, for which
/// `U(x) <= C (x^α + 1)` holds.
pub fn find_growth_certificate(u: &UtilitySpec) -> Option<GrowthCertificate> {
    let mut grid = vec![0.0];
    grid.extend((-3..=6).flat_map(|e| [1.0, 2.0, 5.0].map(|m| m * 10f64.powi(e))));
    for &alpha in &GROWTH_ALPHAS {
        for &c in &GROWTH_CONSTANTS {
            if check_growth(u, c, alpha, &grid) {
                return Some(GrowthCertificate {
                    c,
                    alpha,
                    verified_grid: grid,
                });
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisSet {
    pub name: String,
    pub holds: bool,
    pub conditions: Vec<Condition>,
}

/// Finite witnesses of the moment conditions, over arbitrage-free models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentWitness {
    pub max_inv_beta: f64,
    pub max_inv_kappa: f64,
    pub max_increment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub reference_models: Vec<String>,
    pub bounded_above: bool,
    pub domain: Domain,
    pub growth: Option<GrowthCertificate>,
    pub moments: MomentWitness,
    pub sets: Vec<HypothesisSet>,
}

fn cond(name: &str, holds: bool, detail: impl Into<String>) -> Condition {
    Condition {
        name: name.into(),
        holds,
        detail: detail.into(),
    }
}

fn set(name: &str, conditions: Vec<Condition>) -> HypothesisSet {
    HypothesisSet {
        name: name.into(),
        holds: conditions.iter().all(|c| c.holds),
        conditions,
    }
}

pub fn hypothesis_report(
    family: &ModelFamily,
    u: &UtilitySpec,
    w0: f64,
    mode: AdmissibilityMode,
    opts: CertOptions,
) -> Result<HypothesisReport> {
    let stars = assumption_na(family)?;
    let bounded = u.is_bounded_above();
    let growth = if u.domain == Domain::Real { find_growth_certificate(u) } else { None };

    let mut moments = MomentWitness {
        max_inv_beta: 0.0,
        max_inv_kappa: 0.0,
        max_increment: 0.0,
    };
    for m in &family.models {
        let cert = certificates(&family.tree, m, opts)?;
        if !cert.na {
            continue;
        }
        for n in &cert.nodes {
            moments.max_inv_beta = moments.max_inv_beta.max(1.0 / n.beta);
            moments.max_inv_kappa = moments.max_inv_kappa.max(1.0 / n.kappa);
        }
        for inc in &m.increments {
            moments.max_increment = moments.max_increment.max(norm(inc));
        }
    }
    let moment_detail = format!(
        "finite tree: max 1/beta = {}, max 1/kappa = {}, max |dS| = {}",
        moments.max_inv_beta, moments.max_inv_kappa, moments.max_increment
    );

    let reference = cond(
        "reference_model",
        !stars.is_empty(),
        if stars.is_empty() {
            "no arbitrage-free model whose supports contain all others".to_string()
        } else {
            format!("qualifying models: {}", stars.join(", "))
        },
    );
    let all_reference = cond(
        "all_models_reference",
        stars.len() == family.models.len(),
        format!("{} of {} models qualify", stars.len(), family.models.len()),
    );
    let half_line = cond("half_line_domain", u.domain == Domain::Positive, format!("{:?}", u.domain));
    let real_line = cond("real_line_domain", u.domain == Domain::Real, format!("{:?}", u.domain));
    let bounded_c = cond("bounded_above", bounded, format!("sup U = {}", u.supremum()));
    let positive_w0 = cond("positive_initial_wealth", w0 > 0.0, format!("w0 = {w0}"));
    let intermediate = cond(
        "intermediate_admissibility",
        mode == AdmissibilityMode::Intermediate,
        format!("mode = {mode}"),
    );
    let moments_c = cond("moments", true, moment_detail);
    let growth_c = cond(
        "growth",
        growth.is_some(),
        match &growth {
            Some(g) => format!("U(x) <= {} (x^{} + 1)", g.c, g.alpha),
            None => "no (C, alpha) in the search grid".to_string(),
        },
    );

    let sets = vec![
        set(
            "half_line_bounded",
            vec![reference.clone(), half_line.clone(), bounded_c.clone(), positive_w0.clone(), intermediate.clone()],
        ),
        set(
            "half_line_integrable",
            vec![reference.clone(), half_line, positive_w0, intermediate, moments_c.clone()],
        ),
        set("real_line_bounded", vec![reference, real_line.clone(), bounded_c]),
        set("real_line_growth", vec![all_reference, real_line, growth_c, moments_c]),
    ];
    Ok(HypothesisReport {
        reference_models: stars,
        bounded_above: bounded,
        domain: u.domain,
        growth,
        moments,
        sets,
    })
}
