use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("observable norm {norm} exceeds 1")]
    NormViolation { norm: f64 },

    #[error("linear system over GF(2) is infeasible")]
    Infeasible,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sampler exhausted after {used} copies")]
    SamplerExhausted { used: usize },

    #[error("need more samples: {0}")]
    NeedMoreSamples(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
