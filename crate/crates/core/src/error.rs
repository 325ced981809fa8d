use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input data violates a precondition (non-finite entries, bad targets, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// CSV parse failure with 1-based row/column location.
    #[error("parse error in {path} at row {row}, column {col}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        col: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// The objective blew past the overflow guard during a fit. Carries the
    /// iterate at the point of failure.
    #[error("objective diverged at iteration {iteration}")]
    Diverged { iteration: usize, beta: Vec<f64> },

    #[error("oracle did not converge within {steps} steps")]
    OracleBudgetExhausted { steps: usize },

    #[error("grid search: all {cells} cells failed; first error: {first}")]
    AllCellsFailed { cells: usize, first: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
