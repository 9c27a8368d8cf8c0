use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("contradictory constraints: {0}")]
    ContradictoryConstraints(String),
    #[error("empty mask")]
    EmptyMask,
    #[error("mask dimensions {got:?} do not match image dimensions {expected:?}")]
    DimensionMismatch { expected: (u32, u32), got: (u32, u32) },
    #[error("not enough points: need {need}, got {got}")]
    InsufficientPoints { need: usize, got: usize },
    #[error("degenerate point pattern: {0}")]
    DegeneratePattern(String),
    #[error("no interior points in the pattern")]
    NoInteriorPoints,
    #[error("manifest empty")]
    EmptyCorpus,
    #[error("descriptor length mismatch: expected {expected}, got {got}")]
    DescriptorLength { expected: usize, got: usize },
    #[error("corpus too small: need {need} images, got {got}")]
    CorpusTooSmall { need: usize, got: usize },
    #[error("labels must contain both classes")]
    DegenerateLabels,
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown image id `{0}`")]
    UnknownImage(String),
    #[error("reference image `{0}` is not in the current reference set")]
    NotAReference(String),
    #[error("iteration budget of {0} exhausted")]
    IterationsExhausted(u32),
    #[error("unsupported bit depth: {0}")]
    UnsupportedBitDepth(String),
    #[error("unsupported image: {0}")]
    UnsupportedImage(String),
    #[error("malformed data: {0}")]
    Malformed(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("png decoding failed: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("png encoding failed: {0}")]
    PngEncode(#[from] png::EncodingError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
