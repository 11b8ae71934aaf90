use std::path::PathBuf;

use thiserror::Error;

use crate::classifiers::ClassifierKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("row {row}: unknown emotion label {label:?}")]
    UnknownLabel { row: usize, label: String },
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("dataset has no data rows")]
    EmptyDataset,
    #[error("no rows with an in-scope emotion label")]
    NoInScopeRows,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("vocabulary is empty: every document has zero tokens")]
    EmptyVocabulary,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("training data needs at least two distinct labels")]
    SingleLabel,
    #[error("classifier {kind} failed: {source}")]
    Classifier {
        kind: ClassifierKind,
        #[source]
        source: Box<Error>,
    },
    #[error("unsupported model file version {0}")]
    ModelVersion(u32),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
