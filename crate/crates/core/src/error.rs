use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate curve: first and last raw samples are equal ({0})")]
    DegenerateCurve(f64),

    #[error("curve needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("x = {0} is outside the domain [0, 1]")]
    Domain(f64),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("parse error in record {record} (line {line}): {message}")]
    Parse {
        record: usize,
        line: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver did not converge after {iterations} iterations (best objective {best_value:e})")]
    NotConverged {
        best_params: Vec<f64>,
        best_value: f64,
        iterations: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
