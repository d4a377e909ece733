use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed container or header (WAV or NPY).
    #[error("format error: {0}")]
    Format(String),

    /// Well-formed file whose encoding is not supported.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("input too short: {samples} samples, need at least {window} for one analysis window")]
    EmptyInput { samples: usize, window: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("invalid frontend configuration: {0}")]
    Config(String),

    #[error("spectrogram is already normalized")]
    AlreadyNormalized,

    /// Masking fills with 0, which only equals the mean on zero-mean input.
    #[error("masking requires a normalized (zero-mean) spectrogram")]
    NotNormalized,

    #[error("invalid control points: {0}")]
    ControlPoints(String),

    #[error("singular spline system: rank {rank} of {size}, pivot ratio {pivot_ratio:.3e}")]
    SingularSystem {
        rank: usize,
        size: usize,
        pivot_ratio: f64,
    },

    #[error("unknown policy `{name}`, expected one of: {valid}")]
    UnknownPolicy { name: String, valid: String },

    #[error("invalid policy: {0}")]
    Policy(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
