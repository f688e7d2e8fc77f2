use thiserror::Error;

/// Errors raised by the numeric and symbolic engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("time parameter must be nonzero")]
    ZeroTime,

    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),

    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("axis must be 1, 2 or 3, got {0}")]
    InvalidAxis(usize),

    #[error("{0}")]
    Lowering(String),

    #[error("invalid time list: {0}")]
    InvalidTimes(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
