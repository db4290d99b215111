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

    #[error("{path}: unsupported audio format: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("{path}: malformed WAV file: {reason}")]
    MalformedWav { path: PathBuf, reason: String },

    #[error("{path}: audio stream contains no samples")]
    EmptyAudio { path: PathBuf },

    #[error("{path}: failed to write WAV: {reason}")]
    WavWrite { path: PathBuf, reason: String },

    #[error("input is empty")]
    EmptyInput,

    #[error("input contains a non-finite value")]
    NonFinite,

    #[error("signal of {len} samples is shorter than the required {required}")]
    TooShort { len: usize, required: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("negative value {0} where a magnitude was expected")]
    NegativeValue(f64),

    #[error("the original filter requires an explicit theta")]
    MissingTheta,

    #[error("profile is already in decibels")]
    AlreadyDecibel,

    #[error("image encoding failed: {0}")]
    Image(String),

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
