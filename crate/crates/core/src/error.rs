use std::io;

use thiserror::Error;

/// Errors produced by the sieve engine and the analysis modules.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the function's mathematical domain (for example `n = 0`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A range whose end does not fit in 64 bits.
    #[error("range error: {0}")]
    Range(String),

    /// An argument that violates an operation's precondition.
    #[error("argument error: {0}")]
    Argument(String),

    /// The request exceeds a configured computational ceiling.
    #[error("capability error: {0}")]
    Capability(String),

    /// A regression whose design matrix is singular.
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    /// A block cache file that does not follow the on-disk format.
    #[error("malformed block file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
