use thiserror::Error;

/// Errors raised by the probability primitives, bound evaluators and simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("axis sets overlap or are out of range: {0}")]
    InvalidAxes(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("stage is not deterministic: {0}")]
    NotDeterministic(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
