use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("invalid vote component {0}: must be -1, 0 or +1")]
    InvalidVote(i64),

    #[error("default vector component {0} outside [0, 1]")]
    InvalidDefault(f64),

    #[error("duplicate monomial in committee")]
    DuplicateMonomial,

    #[error("variable {0} already present in monomial")]
    VariableAlreadyBound(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("too many classes for exhaustive search: {got} > {limit}")]
    TooManyClasses { got: usize, limit: usize },

    #[error("internal consistency: {0}")]
    Inconsistency(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("data error at line {line}: {message}")]
    DataAt { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
