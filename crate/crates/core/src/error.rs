use std::path::PathBuf;

use chrono::NaiveDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("label for unknown tweet id `{0}`")]
    UnknownId(String),

    #[error("invalid category code {0} (expected 0..=4)")]
    InvalidCategory(i64),

    #[error("date {0} is outside the study range 2020-01-01..=2020-04-30")]
    OutOfRange(NaiveDate),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("provider failed while sampling #{hashtag}: {message}")]
    Provider { hashtag: String, message: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("training data has a single class")]
    SingleClass,

    #[error("missing upstream artifact: {0}")]
    MissingArtifact(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl ToString) -> Self {
        Error::Parse {
            line,
            message: message.to_string(),
        }
    }
}
