use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: duplicate verse `{verse}` (line {line})", path.display())]
    DuplicateVerse {
        path: PathBuf,
        line: usize,
        verse: String,
    },

    #[error("invalid language code `{0}`: expected three lowercase ASCII letters")]
    InvalidLanguage(String),

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("unknown concept `{0}`")]
    UnknownConcept(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("conflicting backward edges for target node ({concept}, {language}, {verse})")]
    ConflictingEdge {
        concept: String,
        language: String,
        verse: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Whether the error stems from bad user input (files, flags, values)
    /// rather than an internal failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::ConflictingEdge { .. })
    }
}
