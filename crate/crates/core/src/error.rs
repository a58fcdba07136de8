use thiserror::Error;

/// Errors raised by the engines, validators and sweep driver.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{a} is not invertible modulo {n}")]
    NotInvertible { a: i64, n: i64 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid triple {{{p},{q},{r}}}: {reason}")]
    InvalidTriple { p: i64, q: i64, r: i64, reason: String },

    #[error("argument {n} outside the supported range (must be below {limit})")]
    DomainExceeded { n: i64, limit: i64 },

    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCapExceeded { degree: u64, cap: u64 },

    #[error("64-bit overflow in the series engine at index {index}")]
    OverflowDetected { index: usize },

    #[error("coefficient set of {{{p},{q},{r}}} is not a consecutive run")]
    NotConsecutive { p: i64, q: i64, r: i64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("unknown lemma identifier `{0}`")]
    UnknownLemma(String),

    #[error("persistence error: {0}")]
    Persistence(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Persistence(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
