use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at {location}: {message}")]
    Malformed { location: String, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),

    #[error("duplicate topic id {0:?}")]
    DuplicateTopicId(String),

    #[error("document {0:?} breaks timestamp consistency: timestamps must be present on every document or on none")]
    MixedTimestamps(String),

    #[error("empty collection")]
    EmptyCollection,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tie-break policy reverse_chronological requires an index with timestamps")]
    MissingTimestamps,

    #[error("scores are not non-increasing at position {position}: {previous} then {current}")]
    NotSorted {
        position: usize,
        previous: f64,
        current: f64,
    },

    #[error("document {0:?} appears more than once in the ranking")]
    DuplicateInRun(String),

    #[error("index file: {0}")]
    IndexFormat(String),

    #[error("repeatable runs differ across index builds for model {model}")]
    RepeatabilityViolated { model: String },

    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Malformed {
            location: location.into(),
            message: message.into(),
        }
    }
}
