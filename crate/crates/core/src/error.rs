use std::io;

/// Errors produced by the library and the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameters or inputs that violate an operation's contract.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A malformed input file or configuration.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
