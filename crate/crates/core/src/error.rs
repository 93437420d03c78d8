use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("insufficient stub capacity: need at least {required} users per stub domain")]
    Capacity { required: usize },

    #[error("user {0} is not placed on the underlay")]
    Unplaced(u32),

    #[error("group too small: connected component only reaches {achievable} members")]
    GroupTooSmall { achievable: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        SimError::Param(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        SimError::Parse { line, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }
}
