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

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: payload has {got} bytes, expected {expected}")]
    PayloadSize {
        path: PathBuf,
        got: usize,
        expected: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("incompatible grids: {0}")]
    Incompatible(String),

    #[error("no valid pixels: {0}")]
    NoValidData(String),

    #[error("degenerate height range: h_min = h_max = {0}")]
    DegenerateRange(f64),

    #[error("no valid overlap for any shift within +/-{0} px")]
    NoOverlap(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver diverged at iteration {iter}: non-finite value")]
    Diverged { iter: usize },

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
