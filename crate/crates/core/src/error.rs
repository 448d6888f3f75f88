use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch on {axis}: expected {expected}, got {got}")]
    Dimension {
        axis: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a probability distribution: {0}")]
    NotStochastic(String),

    #[error("singular or ill-conditioned linear system (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("solver residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("no convergence after {iterations} iterations (span/residual {span:e})")]
    NoConvergence { iterations: usize, span: f64 },

    #[error("horizon cap {cap} reached before threshold (last value {last_value})")]
    HorizonCap { cap: usize, last_value: f64 },

    #[error("return-mixing clause still violated at h'={violating} (horizon cap {cap})")]
    ReturnClauseUnsatisfied { cap: usize, violating: usize },

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("region never entered during simulation (visit count 0)")]
    RegionNeverEntered,

    #[error("every tracked start point was excluded ({excluded} without a qualifying horizon)")]
    NoQualifyingStarts { excluded: usize },

    #[error("eigenvalue computation failed")]
    Eigen,

    #[error("non-finite loss at step {step}")]
    NonFinite { step: usize },

    #[error("agent failed at step {step}: {message}")]
    Agent { step: usize, message: String },

    #[error("wall-time budget of {limit_secs}s exceeded after {completed} completed units")]
    Budget { limit_secs: f64, completed: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
