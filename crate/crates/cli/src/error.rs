use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration at `{key}`: {message}")]
    Invalid { key: String, message: String },

    #[error("scenario `{id}` failed: {source}")]
    Scenario {
        id: String,
        #[source]
        source: netrace::Error,
    },

    #[error("{context} `{path}`: {source}")]
    Io {
        context: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to write results: {0}")]
    Csv(#[from] csv::Error),

    #[error("enumeration oracle reported {0} failure(s)")]
    Oracle(usize),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Invalid {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Wraps a core error raised while validating the item at `prefix`.
    pub fn from_core(err: netrace::Error, prefix: &str) -> Self {
        match err.within(prefix) {
            netrace::Error::Config { key, message } => CliError::Invalid { key, message },
            other => CliError::invalid(prefix, other.to_string()),
        }
    }

    pub fn io(context: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            context,
            path: path.into(),
            source,
        }
    }
}
