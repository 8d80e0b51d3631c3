use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ground-set sizes differ: {left} vs {right}")]
    GroundSetMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinates must sum to zero (sum is {0})")]
    NonZeroSum(String),

    #[error("zero vector has no face or norming functional")]
    ZeroVector,

    #[error("signed set {0} has an empty positive or negative part")]
    EmptyPart(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported space for this operation: {0}")]
    UnsupportedSpace(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("linear program is unbounded")]
    Unbounded,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
