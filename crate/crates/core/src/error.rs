use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("empty distribution: no valid segment pairs")]
    EmptyDistribution,

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("shape mismatch: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    #[error("insufficient data for class `{class}`: {count} sample(s), need at least {needed}")]
    InsufficientData {
        class: String,
        count: usize,
        needed: usize,
    },

    #[error("cannot stratify: class `{class}` has {count} sample(s) for {folds} folds")]
    Stratification {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

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

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
