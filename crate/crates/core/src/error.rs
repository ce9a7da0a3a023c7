use std::path::PathBuf;

/// Errors shared across the pipeline stages.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no input frames or samples")]
    EmptyInput,

    #[error("frame dimensions do not match: {0}")]
    DimensionMismatch(String),

    #[error("channel layout does not match the requested operation: {0}")]
    ChannelMismatch(String),

    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: PathBuf, reason: String },

    #[error("roi {roi} does not fit inside {width}x{height}")]
    RoiOutOfBounds {
        roi: String,
        width: usize,
        height: usize,
    },

    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("frame too small to downsample: {width}x{height} (need at least 2x2)")]
    TooSmall { width: usize, height: usize },

    #[error("upsample target {target_w}x{target_h} is not a valid expansion of {src_w}x{src_h}")]
    BadTargetDims {
        src_w: usize,
        src_h: usize,
        target_w: usize,
        target_h: usize,
    },

    #[error("pyramid depth {depth} too large for {width}x{height}")]
    DepthTooLarge {
        depth: usize,
        width: usize,
        height: usize,
    },

    #[error("pyramid level shapes do not chain: {0}")]
    ShapeMismatch(String),

    #[error("band {f_lo}..{f_hi} Hz exceeds the Nyquist limit {nyquist} Hz")]
    BandAboveNyquist { f_lo: f64, f_hi: f64, nyquist: f64 },

    #[error("time series of length {len} is too short (need at least {min})")]
    SeriesTooShort { len: usize, min: usize },

    #[error("invalid frequency band: f_lo={f_lo}, f_hi={f_hi} (need 0 < f_lo < f_hi)")]
    InvalidBand { f_lo: f64, f_hi: f64 },

    #[error("sequence of {len} frames is too short (need at least {min})")]
    TooFewFrames { len: usize, min: usize },

    #[error("frame {width}x{height} is smaller than the {window}x{window} comparison window")]
    FrameSmallerThanWindow {
        width: usize,
        height: usize,
        window: usize,
    },

    #[error("no spectral peak inside the requested band")]
    NoPeak,

    #[error("training split contains a single class; cannot balance or fit")]
    SingleClass,

    #[error("training loss became non-finite at epoch {epoch}; reduce the learning rate")]
    NonFiniteLoss { epoch: usize },

    #[error("evaluation requires at least one record")]
    EmptyTestSet,

    #[error("model file rejected: {0}")]
    ModelFormat(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wrap an i/o error with the path it occurred on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::MalformedFile {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
