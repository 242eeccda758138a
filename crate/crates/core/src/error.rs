use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Distribution parameters are invalid (non-positive shape or rate, ...).
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A run or experiment is misconfigured.
    #[error("configuration error: {0}")]
    Config(String),
    /// Samples have zero variance; the distribution has collapsed to a point mass.
    #[error("degenerate distribution: {0}")]
    Degenerate(String),
    /// A quantity is undefined for the given input (e.g. Gini of zero total wealth).
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
