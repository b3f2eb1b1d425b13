use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments violate an operation's preconditions.
    #[error("invalid input: {0}")]
    Input(String),
    #[error("enumeration of {requested}-edge subgraphs exceeds the cap of {cap}")]
    Capacity { requested: usize, cap: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A randomised generator hit its rejection cap; retry with another seed.
    #[error("generation failed: {0}")]
    Generation(String),
    /// Internal audit of a constructed graph failed. Indicates a bug.
    #[error("construction audit failed: {0}")]
    Construction(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
