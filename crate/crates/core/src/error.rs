use thiserror::Error;

/// Errors raised by the exact-arithmetic pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("mismatched base ring: (p={0}, e={1}) vs (p={2}, e={3})")]
    BaseMismatch(u32, u32, u32, u32),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("invalid display: {0}")]
    InvalidDisplay(String),
    #[error("extension required: {0}")]
    ExtensionRequired(String),
    #[error("truncation insufficient: {0}")]
    Truncation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
