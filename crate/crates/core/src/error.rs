use thiserror::Error;

/// Errors shared by every module in the crate.
///
/// `Domain` marks invalid arguments (empty sets, non-positive densities,
/// mismatched orders). `Capacity` marks requests that exceed the documented
/// exact-computation limits; callers can retry with a smaller instance or a
/// heuristic mode.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity limit exceeded: {0}")]
    Capacity(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn capacity<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Capacity(msg.into()))
}
