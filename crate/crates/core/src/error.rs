use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the completion pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode {mode} out of range for a tensor of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid shape {0:?}: need at least one mode and every extent >= 1")]
    InvalidShape(Vec<usize>),

    #[error("buffer of length {len} does not match shape {shape:?}")]
    BufferLength { len: usize, shape: Vec<usize> },

    #[error("index {index} out of bounds for {len} entries")]
    IndexOutOfBounds { index: usize, len: usize },

    #[error("duplicate observed index {0}")]
    DuplicateIndex(usize),

    #[error("NMSE undefined: reference tensor is all zero")]
    UndefinedMetric,

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("SVD did not converge")]
    SvdNoConvergence,

    #[error("observation mask is empty")]
    EmptyMask,

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("observation ratio {0} outside (0, 1]")]
    InvalidRatio(f64),

    #[error("rank {rank} exceeds extent {extent} in mode {mode}")]
    RankExceedsExtent {
        mode: usize,
        rank: usize,
        extent: usize,
    },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("unsupported image format in {path}: {reason}")]
    UnsupportedImage { path: PathBuf, reason: String },

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("unexpected history header {0:?}")]
    CsvHeader(String),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error("config serialization error: {0}")]
    ConfigWrite(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
