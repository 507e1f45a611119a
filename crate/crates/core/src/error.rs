use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A length that must be a power of two (or otherwise sized) was not.
    #[error("sizing error: {0}")]
    Sizing(String),

    /// A numeric argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A coefficient tree or observation array has inconsistent shape.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// The request exceeds what the operation can do (e.g. exhaustive enumeration bound).
    #[error("capability error: {0}")]
    Capability(String),

    /// Not enough data for a fit.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
