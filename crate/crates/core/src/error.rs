use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("label value {0} exceeds 16-bit capacity")]
    Capacity(u32),
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("empty grid: at least one configuration is required")]
    EmptyGrid,
    #[error("could only place {placed} of {requested} shapes")]
    Placement { placed: usize, requested: usize },
    #[error("reference counts: {0}")]
    References(String),
}
