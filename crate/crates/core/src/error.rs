use thiserror::Error;

/// Errors raised by population generation, sampling designs, estimators and
/// the Monte Carlo engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter set that cannot describe a valid population or design.
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// The sample handed to an estimator is not one the estimator supports.
    #[error("design violation: {0}")]
    Design(String),

    /// Missing or inconsistent observations.
    #[error("input error: {0}")]
    Input(String),

    /// A population or sample document that fails validation.
    #[error("invalid document: {0}")]
    Document(String),

    /// Contract violation by the caller (e.g. `i == j` for a pairwise probability).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("replicate {index}: {source}")]
    Replicate { index: u64, source: Box<Error> },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Prefixes the key path of a configuration error, leaving other kinds untouched.
    pub fn within(self, prefix: &str) -> Self {
        match self {
            Error::Config { key, message } => Error::Config {
                key: if key.is_empty() {
                    prefix.to_string()
                } else {
                    format!("{prefix}.{key}")
                },
                message,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
