use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("the uniform null model only supports theta = 0, got {0}")]
    ShiftUnsupported(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("ladder is not sorted nondecreasing at position {0}")]
    UnsortedLadder(usize),

    #[error("stepup constants decrease: d_{j} = {value} < d_{prev_j} = {prev}", prev_j = .j - 1)]
    NonMonotoneLadder { j: usize, value: f64, prev: f64 },

    #[error("wrong ladder kind: expected {0}")]
    WrongLadderKind(&'static str),

    #[error("root finding failed: {0}")]
    RootNotFound(String),

    #[error("FWER is undefined when no hypothesis is true")]
    NoTrueNull,

    #[error("no rule satisfies the error constraint at this level")]
    EmptyFeasibleSet,

    #[error("region is not monotone")]
    NonMonotoneRegion,

    #[error("ordering violated: {0}")]
    Ordering(String),

    #[error("invalid data: {0}")]
    Data(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
