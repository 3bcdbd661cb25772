use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("admissible window for {condition} is empty: {detail}")]
    WindowEmpty { condition: String, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite integrand in element {element} ({what})")]
    Evaluation { element: usize, what: &'static str },

    #[error("{what} did not converge after {iterations} iterations (last value {last})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("line search exhausted {backtracks} backtracks")]
    StepFailure { backtracks: usize },

    #[error("singular linear system (pivot {pivot} at row {row})")]
    Singular { row: usize, pivot: f64 },

    #[error("mountain-pass geometry unavailable: {0}")]
    GeometryUnavailable(String),

    #[error(
        "superlinearity not detected: energy stayed at {last_energy} after {doublings} doublings"
    )]
    SuperlinearityNotDetected { doublings: usize, last_energy: f64 },

    #[error("path level {level} collapsed below half the sphere bound {rho0}")]
    GeometryViolation { level: f64, rho0: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
