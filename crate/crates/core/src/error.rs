use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("edge {edge} references unknown node {node}")]
    DanglingNode { edge: String, node: String },

    #[error("edge {edge} has non-positive length {length}")]
    NonPositiveLength { edge: String, length: f64 },

    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: String },

    #[error("unknown node id {0}")]
    UnknownNode(String),

    #[error("trajectory {trajectory} (line {line}): unknown edge id {edge}")]
    UnknownEdge {
        trajectory: String,
        line: u64,
        edge: String,
    },

    #[error("trajectory {trajectory} (line {line}): timestamp decreases")]
    DecreasingTimestamp { trajectory: String, line: u64 },

    #[error("trajectory {trajectory} (line {line}): edge {edge} does not start where the previous edge ends")]
    Disconnected {
        trajectory: String,
        line: u64,
        edge: String,
    },

    #[error("trajectory {0} has no visits")]
    EmptyTrajectory(String),

    #[error("dataset contains no trajectories")]
    EmptyDataset,

    #[error("segment {0} is missing from the corpus statistics")]
    MissingSegment(String),

    #[error("partition covers {found} elements, expected {expected}")]
    PartitionMismatch { expected: usize, found: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("no route between {from} and {to} after {attempts} attempts")]
    Unreachable {
        from: String,
        to: String,
        attempts: usize,
    },

    #[error("{n} trajectories exceed the distance-matrix cap of {cap}")]
    TooLarge { n: usize, cap: usize },

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

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
