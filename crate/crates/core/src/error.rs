use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point outside the support or a zero-probability conditioning event.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The model does not satisfy the assumptions an operation needs
    /// (for instance an unbounded support where a finite right endpoint is required).
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
