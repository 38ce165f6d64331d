use std::io;

use thiserror::Error;

pub type Result<T, E = RigError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RigError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {index} out of range for graph with {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{what}: size {size} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("graph is disconnected; select a component")]
    Disconnected,

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("result does not match graph: {0}")]
    Mismatch(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl RigError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        RigError::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        RigError::InvalidParameter(msg.into())
    }
}
