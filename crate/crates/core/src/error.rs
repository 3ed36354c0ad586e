use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    /// A connection function produced a value outside `[0, 1]` or is otherwise ill-posed.
    #[error("model definition error: {0}")]
    ModelDefinition(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("replication {index} failed: {source}")]
    Replication {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn rejected(msg: impl Into<String>) -> Error {
    Error::RejectedInput(msg.into())
}

/// Wraps an IO error with the path it concerns.
pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
