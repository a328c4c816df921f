use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range at position {position}: {value} >= {dim}")]
    IndexOutOfRange {
        position: usize,
        value: usize,
        dim: usize,
    },

    #[error("wrong number of indices: expected {expected}, got {got}")]
    IndexLength { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("invalid tensor train: {0}")]
    InvalidTensorTrain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero-norm input: {0}")]
    ZeroNorm(String),

    #[error("oracle returned non-finite value {value} at {index:?}")]
    NonFinite { index: Vec<usize>, value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
