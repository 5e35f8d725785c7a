use thiserror::Error;

/// Errors raised across the toolkit. Each variant names the failing condition;
/// the message carries the offending values.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("overflow error: {0}")]
    Overflow(String),
    #[error("horizon error: {0}")]
    Horizon(String),
    #[error("boundary error: {0}")]
    Boundary(String),
    #[error("edge leak: {0}")]
    EdgeLeak(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("order out of range: {0}")]
    OrderRange(String),
    #[error("compatibility error: {0}")]
    Compatibility(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("convergence error: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
