use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("lambda must be nonzero")]
    ZeroLambda,
    #[error("precision insufficient: {0}")]
    PrecisionInsufficient(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("non-integral value in {0}")]
    NonIntegral(String),
    #[error("singular system: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
