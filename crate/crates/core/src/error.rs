use thiserror::Error;

use crate::arrays::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A row is not a bijection on `0..n`.
    #[error("row {row} is not a permutation of 0..{n}: {reason}")]
    NotAPermutation {
        row: usize,
        n: usize,
        reason: String,
    },

    #[error("malformed array: {0}")]
    MalformedArray(String),

    /// The array is structurally sound but breaks the Tuscan-k condition.
    #[error("array is not Tuscan-{k}{}: {violation}", if *.circular { " (circular)" } else { "" })]
    NotTuscan {
        k: usize,
        circular: bool,
        violation: Violation,
    },

    #[error("size mismatch: {what} (expected {expected}, found {found})")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("symbol {symbol} is out of range for n = {n}")]
    SymbolOutOfRange { symbol: usize, n: usize },

    #[error("phase {phase} is not reduced modulo {modulus}")]
    PhaseOutOfRange { phase: u64, modulus: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty family")]
    EmptyFamily,

    #[error("sequence {index} carries no row metadata")]
    MissingRowMetadata { index: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
