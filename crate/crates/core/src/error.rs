use thiserror::Error;

/// Errors raised across the analysis and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root solver did not converge after {iterations} iterations (max residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("near-multiple root at xi = {xi:?}: |dL/dtau| = {derivative:e} below threshold {threshold:e}")]
    NearMultipleRoot {
        xi: Vec<f64>,
        derivative: f64,
        threshold: f64,
    },

    #[error("unresolvable principal pairing: deviation grows with |xi| (fitted slope {slope:.3}); lower-order perturbation is not bounded")]
    UnboundedPairing { slope: f64 },

    #[error("codimension estimate needs at least 4 usable scales, found {found}")]
    TooFewScales { found: usize },

    #[error("zone coverage violated: {0} grid cells are not assigned to any zone")]
    UncoveredCells(usize),

    #[error("prediction abstained: {0}")]
    Abstain(String),

    #[error("aliasing check failed: {fraction:e} of the energy lies within two cells of the spatial edge")]
    Aliasing { fraction: f64 },

    #[error("propagator overflow at xi = {xi:?}: symbol is unstable (min Im tau = {min_im:e}); see the stability scan")]
    Overflow { xi: Vec<f64>, min_im: f64 },

    #[error("fit needs at least 6 samples in the window, found {found}")]
    TooFewSamples { found: usize },

    #[error("unknown corpus entry `{0}`")]
    UnknownCorpus(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
