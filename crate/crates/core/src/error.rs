use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt image: {0}")]
    CorruptImage(String),

    #[error("expected {expected} channel(s), found {found}")]
    WrongChannelCount { expected: usize, found: usize },

    #[error("channel index {index} out of range for {channels}-channel image")]
    IndexOutOfRange { index: usize, channels: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("unsupported color conversion {from:?} -> {to:?}")]
    UnsupportedConversion {
        from: crate::ColorSpace,
        to: crate::ColorSpace,
    },

    #[error("image dimensions must be at least 1x1")]
    ZeroDimension,

    #[error("no pixel above the region-of-interest threshold")]
    EmptyRoi,

    #[error("image {width}x{height} is smaller than the required {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("tile {tile_w}x{tile_h} is smaller than 8x8 pixels")]
    TileTooSmall { tile_w: usize, tile_h: usize },

    #[error("patch size {0} must be odd and >= 1")]
    BadPatchSize(usize),

    #[error("degenerate image: {0}")]
    DegenerateImage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid pixel data: {0}")]
    InvalidData(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("class id {class} out of range for {k} classes")]
    ClassOutOfRange { class: usize, k: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid manifest: {0}")]
    ManifestInvalid(String),

    #[error("pairing violation: dataset was processed with `{recorded}`, requested `{requested}`")]
    PairingViolation { recorded: String, requested: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
