//! Crate error type.

use thiserror::Error;

/// Errors produced by any module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An element index is not a valid encoding for its group.
    #[error("element index {index} out of range for group of order {order}")]
    IndexOutOfRange { index: u64, order: u64 },

    /// Set elements must be strictly increasing.
    #[error("duplicate element {0} in set")]
    DuplicateElement(u64),

    /// Malformed JSON or a schema violation while parsing.
    #[error("parse error: {0}")]
    Parse(String),

    /// Two operands live in different ambient domains.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// A function table has the wrong number of entries.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Cyclic modulus must be odd where the dilation by 2 is inverted.
    #[error("even cyclic modulus {0}: dilation by 2 is not invertible")]
    EvenModulus(u64),

    /// An argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The operation refuses the input (e.g. a set that is not AP-free).
    #[error("refused: {0}")]
    Refused(String),

    /// A quantity guaranteed by a proved statement failed to materialize.
    /// This indicates an implementation bug, never a property of the input.
    #[error("internal invariant violated: {0}")]
    TheoremViolation(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
