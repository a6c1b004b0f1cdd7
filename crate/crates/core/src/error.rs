use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh mismatch: {left} vs {right}")]
    MeshMismatch { left: String, right: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} is outside the domain of the potential (|u| < 1 required)")]
    Domain { value: f64 },

    #[error("no sign change of f on the root bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("Vandermonde matrix of order {order} is singular to working precision")]
    SingularMatrix { order: usize },

    #[error("stage value left the potential domain at cascade level {level}, stage {stage}: u = {value}")]
    BoundExceeded { level: usize, stage: usize, value: f64 },

    #[error("non-finite value produced at cascade level {level}")]
    NumericalBlowup { level: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
