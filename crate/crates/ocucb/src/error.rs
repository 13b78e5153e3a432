//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration file failed validation. The message names the key and
    /// the constraint it violated.
    #[error("invalid config: {0}")]
    Config(String),

    /// A summary CSV (or other structured input) could not be parsed.
    #[error("invalid input: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
