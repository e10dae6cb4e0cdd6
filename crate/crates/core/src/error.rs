use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the response pipeline and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    Value(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no reference point: sequence has no nose index and none was supplied")]
    MissingReference,

    #[error("no transition found in derivative response")]
    NoTransition,

    #[error("invalid box bounds t1={t1}, t2={t2} for length {len}")]
    BadBounds { t1: usize, t2: usize, len: usize },

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("invalid template parameters: {0}")]
    BadShapeParams(String),

    #[error("invalid warp path: {0}")]
    BadPath(String),

    #[error("empty input set")]
    EmptySet,

    #[error("apex frame {apex} out of range for length {len}")]
    BadApex { apex: usize, len: usize },

    #[error("transition estimate is one-sided; no apex defined")]
    OneSided,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("degenerate ANOVA: {0}")]
    DegenerateAnova(String),

    #[error("invalid AU event: {0}")]
    BadEvent(String),

    #[error("invalid cluster count k={k} for {rows} rows")]
    BadK { k: usize, rows: usize },

    #[error("invalid synthetic spec: {0}")]
    BadSpec(String),

    #[error("point index {index} out of range for {num_points} points")]
    BadIndex { index: usize, num_points: usize },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
