use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("index {index} out of range (bound {bound}) at line {line}")]
    IndexOutOfRange {
        line: usize,
        index: i64,
        bound: usize,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("duplicate source index {source_index} at line {line}")]
    DuplicateSource { line: usize, source_index: usize },

    #[error("cache header mismatch: {0}")]
    CacheHeader(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("bandwidth error: {0}")]
    Bandwidth(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("spectrum error: {0}")]
    Spectrum(String),

    #[error("missing ground-truth match for source vertices {0:?}")]
    MissingMatch(Vec<usize>),

    #[error("optimization diverged at iteration {iteration}")]
    Divergence {
        iteration: usize,
        trace: Vec<crate::coupling::TraceRow>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
