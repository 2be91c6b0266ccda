use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
///
/// Variants split into I/O failures and validation failures so that the CLI
/// can map them onto distinct exit codes.
#[derive(Error, Debug)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path} line {line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("preprocessing failed: {0}")]
    Preprocess(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("corpus at {0} contains no valid snippets")]
    EmptyCorpus(PathBuf),

    #[error("invalid embedding bundle: {0}")]
    Bundle(String),

    #[error("degenerate task {task}: {reason}")]
    DegenerateTask { task: String, reason: String },

    #[error("probe failure: {0}")]
    Probe(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem rather than by the content
    /// of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
