//! Benchmark fixtures shared by the criterion targets.

use robustlab_core::{gen_bachelier, gen_remark_example, ModelFamily, UtilitySpec};

/// Piecewise-linear interpolation of `min(√x, 2)` on `{0, 1, 4, 4.5, 5.5}`.
pub fn remark_utility() -> UtilitySpec {
    UtilitySpec::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (4.0, 2.0), (4.5, 2.0), (5.5, 2.0)])
        .expect("valid points")
}

pub fn remark(n: usize) -> ModelFamily {
    gen_remark_example(100.0, n).expect("valid parameters")
}

/// Binary tree of the given horizon with two drifting models.
pub fn binomial(horizon: usize) -> ModelFamily {
    gen_bachelier(horizon, 0.5, 0.0, &[(1.0, 0.2), (1.5, -0.3)]).expect("valid parameters")
}
