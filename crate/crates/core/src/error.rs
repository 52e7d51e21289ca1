use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// An iterative method failed to converge or produced non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A scale search left the supported range.
    #[error("out of range: {0}")]
    OutOfRange(String),
    /// Missing or inconsistent configuration (bounding boxes, certificates, selectors).
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
