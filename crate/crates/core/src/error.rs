use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("no room: {0}")]
    NoRoom(String),

    #[error("construction failed: {0}")]
    ConstructionFailure(String),

    #[error("primitives are not exact: {0}")]
    NotExact(String),

    #[error("system is not regular: {0}")]
    NotRegular(String),

    #[error("system too large: {unknowns} unknowns exceeds limit {limit}")]
    Size { unknowns: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
