use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Ok,
    /// A witness was checked and did not certify its claim.
    Refuted,
    /// An enumeration or solver cap was exceeded.
    Cap,
    /// Malformed input files or invalid arguments.
    Malformed,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            ExitStatus::Ok => 0,
            ExitStatus::Refuted => 1,
            ExitStatus::Cap => 2,
            ExitStatus::Malformed => 64,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] quantimetric::Error),

    #[error("{message}")]
    Cap {
        message: String,
        #[source]
        source: quantimetric::Error,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("malformed config {path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Cap { .. } | CliError::Core(quantimetric::Error::CapExceeded { .. }) => {
                ExitStatus::Cap
            }
            _ => ExitStatus::Malformed,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
