use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid race result: {0}")]
    InvalidRace(String),

    #[error("invalid season: {0}")]
    InvalidSeason(String),

    #[error("invalid scoring rule: {0}")]
    InvalidRule(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("{0}")]
    OutOfRange(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("driver {0} is not the champion of this season under this rule")]
    NotChampion(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {target}: {source}")]
    Write {
        target: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn write(target: impl Into<String>, source: std::io::Error) -> Self {
        Error::Write {
            target: target.into(),
            source,
        }
    }

    /// True when the reader of our output went away (`clinchsim ... | head`).
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            Error::Json(e) => return e.io_error_kind() == Some(std::io::ErrorKind::BrokenPipe),
            Error::Write { source, .. } => Some(source),
            Error::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        };
        io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error comes from reading or validating input data, as
    /// opposed to a bad argument.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::EmptyDataset
                | Error::InvalidDataset(_)
                | Error::InvalidRace(_)
                | Error::Parse { .. }
                | Error::Io { .. }
                | Error::Csv(_)
        )
    }
}
