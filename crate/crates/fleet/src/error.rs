use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unreadable header in {path}: {message}")]
    Header { path: PathBuf, message: String },

    #[error("sample size {n} outside [{min}, {max}]")]
    SampleSize { n: usize, min: usize, max: usize },

    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("zero variance")]
    ZeroVariance,

    #[error("singular regression: predictor has zero variance")]
    Singular,

    #[error("non-finite value in sample")]
    NonFinite,

    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
}
