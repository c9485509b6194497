use thiserror::Error;

/// Failure classes. Each maps to a distinct CLI exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("cap exceeded: {what} (estimated {estimate}, cap {cap})")]
    CapExceeded { what: String, estimate: u128, cap: u128 },
    #[error("invariant falsified: {0}")]
    Falsified(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Domain(_) | Error::Precondition(_) => 2,
            Error::CapExceeded { .. } => 3,
            Error::Falsified(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn falsified(msg: impl Into<String>) -> Error {
    Error::Falsified(msg.into())
}
