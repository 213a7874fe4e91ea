use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid function data: {0}")]
    InvalidFunction(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("data invariant violated: {0}")]
    Invariant(String),

    #[error("inadmissible parameters for {id}: {reason}")]
    Inadmissible { id: String, reason: String },

    #[error("degenerate family: {0}")]
    DegenerateFamily(String),

    #[error("zero function: ratio undefined")]
    ZeroFunction,

    #[error("unknown inequality id: {0}")]
    UnknownId(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
