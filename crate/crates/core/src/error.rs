use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gyro trace needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("timestamps not strictly increasing at index {index} ({prev} ns -> {next} ns)")]
    NonMonotonicTimestamps { index: usize, prev: i64, next: i64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("time {t} ns outside trajectory span [{start}, {end}] ns")]
    OutsideSpan { t: i64, start: i64, end: i64 },

    #[error("quaternion norm {0} is not unit")]
    NonUnitQuaternion(f64),

    #[error("row {y} outside [0, {rows}]")]
    RowOutOfRange { y: f64, rows: usize },

    #[error("mapped point lies at infinity")]
    PointAtInfinity,

    #[error("invalid camera configuration: {0}")]
    Camera(String),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("image block {w}x{h} smaller than the 3x3 kernel")]
    BlockTooSmall { w: usize, h: usize },

    #[error("blur extent {r} outside [{min}, {max}]")]
    ExtentOutOfRange { r: usize, min: usize, max: usize },

    #[error("kernel bank is empty")]
    EmptyBank,

    #[error("bank file: {0}")]
    BankFormat(String),

    #[error("image format: {0}")]
    ImageFormat(String),

    #[error("homography is singular")]
    SingularHomography,

    #[error("need at least {needed} correspondences, got {got}")]
    TooFewCorrespondences { needed: usize, got: usize },

    #[error("no non-degenerate sample found")]
    Degenerate,

    #[error("empty keypoint list")]
    EmptyKeypoints,

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable short identifier used in machine-readable error lines and C error codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::TooFewSamples(_) => "too_few_samples",
            Error::NonMonotonicTimestamps { .. } => "non_monotonic",
            Error::NonFinite(_) => "non_finite",
            Error::OutsideSpan { .. } => "outside_span",
            Error::NonUnitQuaternion(_) => "non_unit_quaternion",
            Error::RowOutOfRange { .. } => "row_out_of_range",
            Error::PointAtInfinity => "point_at_infinity",
            Error::Camera(_) => "camera",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::BlockTooSmall { .. } => "block_too_small",
            Error::ExtentOutOfRange { .. } => "extent_out_of_range",
            Error::EmptyBank => "empty_bank",
            Error::BankFormat(_) => "bank_format",
            Error::ImageFormat(_) => "image_format",
            Error::SingularHomography => "singular_homography",
            Error::TooFewCorrespondences { .. } => "too_few_correspondences",
            Error::Degenerate => "degenerate",
            Error::EmptyKeypoints => "empty_keypoints",
            Error::File { .. } | Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::File { path, source }
    }
}
