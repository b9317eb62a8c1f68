use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: invalid element id {token:?}")]
    Parse { line: usize, token: String },
    #[error("line {line}: element id {token} does not fit in 64 bits")]
    Overflow { line: usize, token: String },
    #[error("line {line}: element id {id} is not below the declared universe bound {bound}")]
    OutOfUniverse { line: usize, id: u64, bound: u64 },
    #[error("empty stream")]
    EmptyStream,
    #[error("invalid synthetic spec: {0}")]
    InvalidSynthetic(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("universe bound {bound} is not below the field prime {prime}")]
    UniverseTooLarge { bound: u64, prime: u64 },
    #[error("sketches are not mergeable: {0}")]
    SketchMismatch(&'static str),
    #[error("guess ladder is empty (max set size is 0)")]
    EmptyGuessLadder,
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("time limit exceeded")]
    TimedOut,
    #[error("config error: {0}")]
    Config(String),
    #[error("report error: {0}")]
    Report(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
