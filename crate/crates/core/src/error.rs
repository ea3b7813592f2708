use thiserror::Error;

use crate::scalar::Field;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("mixed-field arithmetic: {left} vs {right}")]
    FieldMismatch { left: Field, right: Field },

    #[error("ambient dimension mismatch: n={left} vs n={right}")]
    AmbientMismatch { left: usize, right: usize },

    #[error("{what} exceeds size guard ({got} > {limit})")]
    SizeGuard {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("expected {expected} arguments, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {0} does not have the required kind")]
    WrongVertexKind(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("operation requires a relative graph")]
    NotRelative,

    #[error("operation requires an absolute graph")]
    NotAbsolute,

    #[error("representation has no image for generator g{0}")]
    UnknownGenerator(u32),

    #[error("division by zero")]
    DivisionByZero,

    #[error("prime field F_{p} cannot divide by {divisor}")]
    PrimeTooSmall { p: u64, divisor: String },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("underdetermined system: {samples} samples, at least {required} required")]
    Underdetermined { samples: usize, required: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
