use thiserror::Error;

/// Errors that stop an operation outright. Invariant violations that a
/// validator can describe are reported through `ValidationReport` instead.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("index {index} out of range (bound {bound})")]
    Index { index: usize, bound: usize },
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("too many atoms: {count} exceeds cap {cap}")]
    AtomCap { count: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Structural(msg.into()))
}
