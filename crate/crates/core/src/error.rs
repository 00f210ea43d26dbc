use thiserror::Error;

/// Errors raised by the scenario-tree toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("leaf at {path} has depth {depth}, expected horizon {horizon}")]
    NonUniformDepth {
        path: String,
        depth: usize,
        horizon: usize,
    },
    #[error("children of {path} have probabilities summing to {sum}")]
    ProbabilitySumViolation { path: String, sum: f64 },
    #[error("branch probability {prob} at {path} is not strictly positive")]
    NonPositiveProbability { path: String, prob: f64 },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("depth {depth} outside 0..={horizon}")]
    DepthOutOfRange { depth: usize, horizon: usize },
    #[error("conditional support at {path} is affine but does not contain the origin")]
    AffineSupportNotLinear { path: String },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model `{model}` admits a one-step arbitrage at {path}")]
    ArbitrageAtNode { model: String, path: String },
    #[error("conditional support at {path} is {{0}}; certificate is vacuous")]
    DegenerateSupport { path: String },
    #[error("model `{0}` admits an arbitrage opportunity")]
    ArbitrageInModel(String),
    #[error("|mu| = {mu} must be strictly below sigma = {sigma}")]
    DriftDominatesVolatility { sigma: f64, mu: f64 },
    #[error("reference measure lacks full support")]
    BaseNotFullSupport,
    #[error("{x} lies outside the interior of the utility domain")]
    OutsideDomain { x: f64 },
    #[error("approximation point {x} lies outside the utility domain")]
    PointsOutsideDomain { x: f64 },
    #[error("approximation points must be strictly increasing")]
    PointsNotIncreasing,
    #[error("no admissible strategy exists")]
    Infeasible,
    #[error("objective is unbounded over the admissible set")]
    Unbounded,
    #[error("the safe portfolio is not admissible at w0 = {w0}")]
    DomainViolationAtStart { w0: f64 },
    #[error("{dims} strategy coordinates exceed the brute-force limit of {limit}")]
    TooManyDimensions { dims: usize, limit: usize },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("time-consistency check needs horizon 2, got {0}")]
    UnsupportedHorizon(usize),
    #[error("no equivalent martingale measure reproduces the given prices")]
    NoConsistentPricingMeasure,
    #[error("stock model `{0}` admits an arbitrage opportunity")]
    ArbitrageInStockModel(String),
    #[error("cannot parse utility `{spec}`: {message}")]
    UtilityParse { spec: String, message: String },
    #[error("linear program solver failed: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
