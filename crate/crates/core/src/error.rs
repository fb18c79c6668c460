use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path}:{line}: duplicate {what} `{key}` (first seen on line {first})")]
    Duplicate {
        path: PathBuf,
        line: usize,
        first: usize,
        what: &'static str,
        key: String,
    },

    #[error("unknown emotion label `{0}`")]
    UnknownLabel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot fit on an empty corpus")]
    EmptyCorpus,

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("training set contains a single class; at least two are required")]
    SingleClass,

    #[error("feature dimension mismatch: model expects {expected}, vector has {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class {category} has {count} document(s); at least {needed} required")]
    ClassTooSmall {
        category: crate::EmotionCategory,
        count: usize,
        needed: usize,
    },

    #[error("model file version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("model file is corrupt: {0}")]
    Corrupt(String),

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
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
