//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Vector or matrix shape does not match what the operation expects.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Invalid argument or precondition violation.
    #[error("invalid input: {0}")]
    Input(String),

    /// Malformed dataset contents (CSV ingestion, NaN entries, ...).
    #[error("data error at row {row}, column {column}: {message}")]
    Data {
        row: usize,
        column: usize,
        message: String,
    },

    /// A model fit failed (degenerate data, divergence, ...).
    #[error("fit failed: {0}")]
    Fit(String),

    /// The numerical solver produced a non-finite value or otherwise broke down.
    #[error("solver failed at iteration {iteration}: {message}")]
    Solver { iteration: usize, message: String },

    /// The requested counterfactual could not be reached; carries the best iterate found.
    #[error("infeasible request: {message}")]
    Infeasible { message: String, best: Vec<f64> },

    /// A benchmark run was aborted (for example, too many failed solves).
    #[error("benchmark aborted: {0}")]
    Benchmark(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
