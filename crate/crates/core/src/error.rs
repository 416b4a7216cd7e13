use thiserror::Error;

/// Errors across parsing, construction, and verification.
#[derive(Debug, Error)]
pub enum Error {
    /// Semantic problem in an input tree, with a path locating the node
    /// (e.g. `children[1].children[0]`).
    #[error("parse error at {path}: {msg}")]
    Parse { path: String, msg: String },

    /// Malformed JSON; carries serde's line/column.
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unknown node: {0}")]
    UnknownNode(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("ridge extraction failed: {0}")]
    Extraction(String),

    #[error("invalid packing: {0}")]
    BadPacking(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
