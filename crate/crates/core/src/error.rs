use thiserror::Error;

/// Errors produced by the model, estimation, LP and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Product indices in messages are 1-based, matching the external numbering.
    #[error("MLE undefined: product {product} was never offered")]
    EstimationUndefined { product: usize },

    #[error("confidence radius undefined for zero exposures")]
    UndefinedRadius,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration over 2^{n} assortments refused (limit is N <= {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("invalid switch budget: q(L, K) = {0} < 1")]
    InvalidBudget(i64),

    #[error("cannot offer an assortment after the sale has stopped")]
    Stopped,

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
