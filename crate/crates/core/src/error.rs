use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("schema violation in {location}: {reason}")]
    SchemaViolation { location: String, reason: String },

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bad blur kernel: size {size}, sigma {sigma}")]
    BadKernel { size: usize, sigma: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("scene {0} has no sampled frames")]
    EmptyScene(String),

    #[error("malformed image {path}: {reason}")]
    BadImage { path: String, reason: String },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("insufficient data: {0} usable pairs, need at least 2")]
    InsufficientData(usize),

    #[error("degenerate column: ranks are constant")]
    DegenerateColumn,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("grounding enabled but no causal context supplied for item {0}")]
    MissingContext(String),

    #[error("no evidence for transition `{0}`")]
    MissingEvidence(String),

    #[error("grounding enabled but no graph supplied")]
    MissingGraph,

    #[error("unknown prompt template `{0}`")]
    UnknownTemplate(String),

    #[error("client failure: {0}")]
    ClientFailure(String),
}

impl Error {
    pub(crate) fn schema(location: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::SchemaViolation {
            location: location.into(),
            reason: reason.into(),
        }
    }
}
