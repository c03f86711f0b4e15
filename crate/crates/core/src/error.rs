use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown vote token `{token}`")]
    UnknownVote { line: usize, token: String },

    #[error("duplicate vote record for proposition `{proposition}` and deputy `{deputy}`")]
    DuplicateRecord { proposition: String, deputy: String },

    #[error("the extraction period contains no propositions")]
    EmptyPeriod,

    #[error("no deputy voted in the extraction period")]
    EmptyVertexSet,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid move: {0}")]
    InvalidMove(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exhaustive enumeration refused for {n} vertices (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("graph has no edges")]
    EdgelessGraph,

    #[error("{0}")]
    Metadata(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

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

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
