use thiserror::Error;

use crate::genus::GenusReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("NotSquarefree: {0} is divisible by the square of {1}")]
    NotSquarefree(i64, u64),
    #[error("ValueOutOfRange: {0}")]
    ValueOutOfRange(String),
    #[error("NotCoprime: {0} and {1} share a factor")]
    NotCoprime(i64, u64),
    #[error("InvalidPlace: {0}")]
    InvalidPlace(String),
    #[error("ZeroArgument: symbol arguments must be nonzero")]
    ZeroArgument,
    #[error("InvalidDiscriminant: {0}")]
    InvalidDiscriminant(i64),
    #[error("InvalidPlaceSets: {0}")]
    InvalidPlaceSets(String),
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("RamifiedInGoverning: {0} divides 2 times the governing generators")]
    RamifiedInGoverning(u64),
    #[error("OverlapError: ramified prime(s) {0:?} also lie in S0 or T")]
    Overlap(Vec<u64>),
    #[error("InvalidRange: {0}")]
    InvalidRange(String),
    #[error("BudgetExhausted: no prime up to {budget} has Frobenius vector {target:?}")]
    BudgetExhausted { target: Vec<u8>, budget: u64 },
    #[error("VerificationFailed: {reason}")]
    VerificationFailed { reason: String, report: Option<Box<GenusReport>> },
    #[error("NotFundamental: {0}")]
    NotFundamental(i64),
    #[error("Overflow: {0}")]
    Overflow(&'static str),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by a broken invariant.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::VerificationFailed { .. } | Error::Internal(_) | Error::BudgetExhausted { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
