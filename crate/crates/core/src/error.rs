use thiserror::Error;

/// Errors shared across the engine.
#[derive(Debug, Error)]
pub enum DgError {
    #[error("field mismatch: operands live over different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid presentation: {0}")]
    Presentation(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, DgError>;
