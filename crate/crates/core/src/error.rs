use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input violates a precondition (normalization, weights, ranges, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A dimension or tensor size exceeds the supported range.
    #[error("size limit exceeded: {what} = {value} (limit {limit})")]
    SizeLimit {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("unsupported dimension {0}: only d = 2 or an odd prime is supported")]
    UnsupportedDimension(usize),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
