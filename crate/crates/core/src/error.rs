use thiserror::Error;

/// Errors raised by the damped-wave laboratory.
#[derive(Debug, Error)]
pub enum AdwError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed cutoff profile: {0}")]
    Profile(String),

    #[error("grid mismatch: expected {expected}, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("aliasing: grid size {grid} must be at least 4 * n_max = {required}")]
    Aliasing { grid: usize, required: usize },

    #[error("frequency k = {k} is not resolved on a grid of size {grid}")]
    Unresolved { k: f64, grid: usize },

    #[error("eigensolver failed to converge (matrix dumped to {dump})")]
    Eigensolver { dump: String },

    #[error("non-finite value detected at t = {time}: {what}")]
    NonFinite { time: f64, what: String },

    #[error("decay fit: {0}")]
    Fit(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = AdwError> = std::result::Result<T, E>;
