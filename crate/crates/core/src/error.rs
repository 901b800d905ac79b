use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative or non-finite probability {value} at index {index}")]
    BadProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, expected 1 within {tol:e}")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("alphabet has {labels} labels but {probs} probabilities")]
    LengthMismatch { labels: usize, probs: usize },

    #[error("duplicate alphabet label `{0}`")]
    DuplicateLabel(String),

    #[error("alphabets differ: {0}")]
    AlphabetMismatch(String),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("{what} has size {size}, limit is {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite objective at step {step} ({snapshot})")]
    NonFinite { step: usize, snapshot: String },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
