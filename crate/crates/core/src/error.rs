use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed HAR document at byte {offset}: {message}")]
    HarParse { offset: usize, message: String },

    #[error("session has no usable entries")]
    EmptySession,

    #[error("empty hostname")]
    EmptyHostname,

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("coverage is undefined for first-party node {0}")]
    FirstPartyNode(String),

    #[error("graph file: {0}")]
    GraphFormat(String),

    #[error("term {0:?} is not in the vocabulary")]
    OutOfVocabulary(String),

    #[error("training data: {0}")]
    Training(String),

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("feature vector has {actual} values, model expects {expected}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("table {path}: {message}")]
    Table { path: String, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("missing {what} for document {document}")]
    MissingData { what: &'static str, document: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn table(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Table {
            path: path.into(),
            message: message.into(),
        }
    }
}
