//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("invalid prime {0}")]
    InvalidPrime(u64),

    #[error("field too large: {0}")]
    FieldTooLarge(String),

    #[error("no embedding of F_{src} into F_{dst}: extension degrees do not divide")]
    NoEmbedding { src: u64, dst: u64 },

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("inconsistent point counts: {0}")]
    CountInconsistent(String),

    #[error("invalid L-polynomial: {0}")]
    InvalidLPolynomial(String),

    #[error("series precision exhausted (max {0} coefficients)")]
    PrecisionError(usize),

    #[error("divisor support not resolved within place degree {0}; raise the search bound")]
    SupportNotFound(u32),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("integer overflow in {0}")]
    OverflowError(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
