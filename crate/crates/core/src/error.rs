use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not symmetric (max asymmetry {asym:e}, tolerance {tol:e})")]
    NotSymmetric { asym: f64, tol: f64 },
    #[error("matrix is singular or not positive definite (pivot {pivot:e} at row {row})")]
    Singular { row: usize, pivot: f64 },
    #[error("non-finite value produced at index {0}")]
    NonFinite(usize),
    #[error("clip has no frames or no pixels")]
    EmptyClip,
    #[error("need at least {needed} frames, got {got}")]
    DegenerateLength { needed: usize, got: usize },
    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("pyramid too deep: {0}")]
    PyramidDepth(String),
    #[error("invalid synthetic spec: {0}")]
    Validation(String),
    #[error("no signal: fundamental amplitude {amplitude:e} in frame {frame}")]
    NoSignal { frame: usize, amplitude: f64 },
    #[error("format error: {0}")]
    Format(String),
    #[error("frame {frame} ({path}): {source}")]
    Frame {
        frame: usize,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
