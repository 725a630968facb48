use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("cooperation parameter alpha = {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error(
        "rank deficient matrix: numerical rank {rank} < {rows} rows \
         (smallest retained singular value {smallest_retained:e})"
    )]
    RankDeficient {
        rank: usize,
        rows: usize,
        smallest_retained: f64,
    },
    #[error("gain matrix is not symmetric positive definite")]
    GainNotPositiveDefinite,
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),
    #[error("rank deficiency at step {step}: {source}")]
    NumericalAbort {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("pose IK did not converge after {iterations} iterations (residual {residual:e})")]
    IkNotConverged { iterations: usize, residual: f64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config at `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
