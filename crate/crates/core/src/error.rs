use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("conductor {from} does not divide {to}")]
    NotDivisible { from: u32, to: u32 },
    #[error("modular image undefined: prime {0} divides a denominator")]
    BadPrime(u64),
    #[error("invalid modulus {0}: {1}")]
    InvalidModulus(u64, String),
    #[error("{0} is not a prime with 3 | p - 1")]
    UnsupportedPrime(u32),
    #[error("r = {r} does not have multiplicative order 3 modulo {p}")]
    InvalidR { p: u32, r: u32 },
    #[error("invalid module label {0}")]
    InvalidLabel(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("zero element in a sequence that must avoid 0")]
    ZeroElement,
    #[error("sequence of length {0} exceeds the enumeration guard of {1}")]
    TooLong(usize, usize),
    #[error("empty set")]
    EmptySet,
    #[error("prime {0} exceeds the exhaustive search guard")]
    GuardExceeded(u32),
    #[error("polynomial is not A-invariant (monomial {0} has non-zero weight)")]
    NotAInvariant(String),
    #[error("polynomial is not homogeneous")]
    Inhomogeneous,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("stabilizer element {0} is not in the kernel of the character")]
    StabilizerNotInKernel(String),
    #[error("module precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
