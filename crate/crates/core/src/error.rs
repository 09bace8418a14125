use thiserror::Error;

/// Errors raised by the checkers, decompositions and factorization pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input (empty sequence, bad parameter, wrong length).
    #[error("invalid input: {0}")]
    Input(String),
    /// The operation is undefined for this input (zero leading coefficient, vanishing ratio).
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Both tails of a driver sequence vanish; the law is degenerate at the origin.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// A numerical routine failed to converge or lost too much accuracy.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
