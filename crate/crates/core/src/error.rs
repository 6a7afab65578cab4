use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty mesh")]
    EmptyMesh,

    #[error("mesh extent cannot be represented: {0}")]
    MeshExtent(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("dims mismatch: expected {expected:?}, found {found:?}")]
    DimsMismatch {
        expected: [usize; 3],
        found: [usize; 3],
    },

    #[error("empty contact map")]
    EmptyContactMap,

    #[error("empty cluster list")]
    EmptyClusters,

    #[error("no grasp candidates")]
    NoGraspCandidates,

    #[error("empty ergonomic candidate set")]
    EmptyErgonomicSet,

    #[error("no feasible handover orientation")]
    NoFeasibleOrientation,

    #[error("invalid granularity {0}: must be a positive divisor of 360")]
    InvalidGranularity(u32),

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParam { name: String, message: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("mixed parameters within group `{0}`")]
    MixedParameters(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
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

    pub(crate) fn param(name: &str, message: impl Into<String>) -> Self {
        Error::InvalidParam {
            name: name.to_string(),
            message: message.into(),
        }
    }
}
