use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not invertible modulo {1}")]
    NotInvertible(String, u64),
    #[error("coefficients from different fields cannot be combined: {0}")]
    FieldMismatch(String),
    #[error("algebra mismatch: {0}")]
    SpecMismatch(String),
    #[error("exponent {exponent} exceeds truncation bound {max}")]
    ExponentOutOfRange { exponent: u64, max: u32 },
    #[error("{0}! is not invertible in characteristic {1}")]
    FactorialNotInvertible(u32, u64),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("invalid multi-index: {0}")]
    InvalidMultiIndex(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("support mode needs a weight-homogeneous multiplication")]
    MixedWeight,
    #[error("truncation bound {max} is below the required {required}")]
    TruncationTooSmall { max: u32, required: u64 },
    #[error("non-integral coefficient {0} in a universal decomposition")]
    Integrality(String),
    #[error("evaluation did not land in degree zero: {0}")]
    NotHomogeneous(String),
    #[error("the {0} check passes, there is no witness")]
    NoWitness(String),
}
