use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions {width}x{height}: both must be at least 1")]
    InvalidDimensions { width: usize, height: usize },

    #[error("pixel buffer holds {actual} values, expected {expected}")]
    PixelCountMismatch { expected: usize, actual: usize },

    #[error("upsampling factor must be at least 1")]
    ZeroFactor,

    #[error("region `{name}` ({x0},{y0}) {w}x{h} does not fit inside a {width}x{height} image")]
    RegionOutOfBounds {
        name: String,
        x0: i64,
        y0: i64,
        w: i64,
        h: i64,
        width: usize,
        height: usize,
    },

    #[error("pixel population is empty")]
    EmptyRegion,

    #[error("dimension mismatch in {context}: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        context: String,
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("degenerate region: every pixel is 0")]
    AllBlack,

    #[error("undefined (constant region): standard deviation is 0")]
    ZeroDeviation,

    #[error("fused and reference images are identical")]
    IdenticalImages,

    #[error("histogram holds no pixels")]
    EmptyHistogram,

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("invalid region config: {0}")]
    Config(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed image data: {0}")]
    Format(String),

    #[error("unsupported image: {0}")]
    Unsupported(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Read { .. } | Error::Format(_) | Error::Unsupported(_) => 2,
            Error::DimensionMismatch { .. } => 3,
            Error::Config(_) | Error::RegionOutOfBounds { .. } => 4,
            Error::InvalidThresholds(_) | Error::InvalidArgument(_) => 64,
            _ => 1,
        }
    }

    pub(crate) fn mismatch(
        context: impl Into<String>,
        left: (usize, usize),
        right: (usize, usize),
    ) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            left_w: left.0,
            left_h: left.1,
            right_w: right.0,
            right_h: right.1,
        }
    }
}
