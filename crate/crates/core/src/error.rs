use thiserror::Error;

/// Errors raised by the simulation library.
///
/// Every variant is a usage error: the caller passed arguments that violate a
/// documented precondition. Runtime sampling never fails.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("node {node} out of range for network of {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("node {0} listed more than once")]
    DuplicateNode(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("inconsistent network: {0}")]
    Inconsistent(String),
    #[error("topology has no node geometry")]
    MissingGeometry,
    #[error("no state repeated within {cap} updates")]
    StepCapExceeded { cap: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
