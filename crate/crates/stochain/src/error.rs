use thiserror::Error;

/// Errors surfaced by bound evaluation, example instantiation, and estimators.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data (empty chain, missing field, length mismatch).
    #[error("domain error: {0}")]
    Domain(String),

    /// A declared invariant does not hold (negative field, non-convex CGF, ...).
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// A documented precondition was not met by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A series tail could not be certified under the requested truncation policy.
    #[error("tail bound not certifiable: {0}")]
    Tail(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
