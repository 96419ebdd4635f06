use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window: lo ({lo}) must be strictly below hi ({hi})")]
    InvalidWindow { lo: f32, hi: f32 },

    #[error("invalid dimensions {0:?}: every extent must be positive")]
    InvalidDims([usize; 3]),

    #[error("payload holds {found} values but dims {dims:?} require {expected}")]
    LengthMismatch {
        dims: [usize; 3],
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimsMismatch(String),

    #[error("malformed header: {0}")]
    Header(String),

    #[error("unsupported dtype or layout: {0}")]
    UnsupportedDtype(String),

    #[error("mask contains non-binary value {0}")]
    NonBinaryMask(f32),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("phantom generation failed: {0}")]
    Generation(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("fit diverged: non-finite loss at step {step}")]
    Divergence { step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
