use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {dim} is not divisible by the subspace count {subspaces}")]
    DimensionNotDivisible { dim: usize, subspaces: usize },

    #[error("insufficient training data: {have} vectors, need at least {need}")]
    InsufficientTrainingData { have: usize, need: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("the database is empty")]
    EmptyDatabase,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("key generator exhausted")]
    Exhausted,
    #[error("probe budget of {budget} keys exhausted before finding L results")]
    BudgetExceeded { budget: u64 },

    #[error("requested {requested} results but only {available} items are indexed")]
    ExhaustedBeforeL { requested: usize, available: usize },

    #[error("table count {tables} does not divide the subspace count {subspaces}")]
    TablesNotDivisor { tables: usize, subspaces: usize },

    #[error("pop on an empty queue")]
    EmptyQueue,

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("truncated file")]
    TruncatedFile,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate covariance: need more vectors ({n}) than dimensions ({dim})")]
    DegenerateCovariance { n: usize, dim: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Whether the error stems from bad input (arguments, files) rather than
    /// an internal failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::MalformedHeader(_)
                | Error::TruncatedFile
                | Error::InvalidParameter(_)
                | Error::DimensionMismatch { .. }
                | Error::DimensionNotDivisible { .. }
                | Error::TablesNotDivisor { .. }
                | Error::InsufficientTrainingData { .. }
                | Error::LengthMismatch { .. }
                | Error::DegenerateCovariance { .. }
                | Error::ExhaustedBeforeL { .. }
                | Error::EmptyDatabase
        )
    }
}
