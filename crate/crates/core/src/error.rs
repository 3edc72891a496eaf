use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this manifold model.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// A computation would exceed a configured hard cap.
    #[error("resource limit: {what} would exceed the cap of {cap}")]
    ResourceLimit { what: String, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
