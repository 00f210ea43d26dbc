//! Robust expected-utility maximisation on finite scenario trees.
//!
//! A [`ModelFamily`] holds several price models on one [`FilteredTree`].
//! The crate checks classical and robust no-arbitrage, builds martingale
//! measures, bounds admissible positions, and solves
//! `sup_φ min_S E[U(W_T^S(w0, φ))]` exactly for piecewise-linear utilities
//! and by projected supergradient ascent otherwise.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arbitrage;
pub mod consistency;
pub mod emm;
pub mod error;
pub mod generators;
pub mod hypotheses;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod market;
pub mod optimizer;
pub mod rng;
pub mod space;
pub mod utility;

pub use arbitrage::{
    assumption_na, beta_kappa, certificates, g_bounds, na_check, one_step_na, robust_na, BoundProcess, CertOptions,
    NaCertificate, NaReport, NodeCertificate, RobustNaVerdict,
};
pub use consistency::{recombine, time_consistency_check, PathLaw, Recombination, TimeConsistencyVerdict};
pub use emm::{bachelier_emm_closed_form, density, find_emm, verify_martingale, EmmResult, MartingaleCheck};
pub use error::{Error, Result};
pub use generators::{gen_bachelier, gen_option_trading, gen_remark_example, gen_two_drift, OptionMarket};
pub use hypotheses::{find_growth_certificate, hypothesis_report, GrowthCertificate, HypothesisReport};
pub use io::{load_market, parse_market, save_market};
pub use market::{
    check_containment, conditional_support, project_strategy, wealth_process, ModelFamily, PriceModel, Strategy,
    SubspaceField,
};
pub use optimizer::{
    brute_force_oracle, constraint_system, evaluate_robust, model_values, solve_lp, solve_supergradient,
    AdmissibilityMode, AscentOptions, LpOptions, Method, RobustSolution,
};
pub use space::{conditional_expectation, expectation, AdaptedProcess, FilteredTree, Measure, NodeSpec, RandomVariable};
pub use utility::{check_growth, pl_under_approximation, Domain, UtilityKind, UtilitySpec};
