use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("horizon {horizon} is smaller than the largest schedule point {needed}")]
    HorizonTooSmall { horizon: usize, needed: usize },

    #[error("empty schedule")]
    EmptySchedule,

    #[error("{0} is empty")]
    EmptySet(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("only {found} complete blocks fit below horizon {horizon} (need {needed}); try a horizon of at least {suggested}")]
    TooFewBlocks {
        found: usize,
        needed: usize,
        horizon: usize,
        suggested: usize,
    },

    #[error("dominance fails at position {index}: x_n = {x} > y_n = {y}")]
    DominanceViolated { index: usize, x: usize, y: usize },

    #[error("length mismatch: {what} has {left} entries, expected {right}")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("limit sequence is not Cauchy: tail spread {spread} exceeds {tolerance}")]
    NotCauchy { spread: f64, tolerance: f64 },

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: corrupt cache file")]
    CorruptCache { path: PathBuf },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(input: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
