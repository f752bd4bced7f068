use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input contains a non-finite value")]
    NonFinite,

    #[error("generator matrix is singular or malformed: {0}")]
    BadGenerator(String),

    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("dimension {0} exceeds the enumeration limit of 8")]
    DimensionTooLarge(usize),

    #[error("radius hint must be at least 1")]
    InvalidRadiusHint,

    #[error("at least {min} trials required, got {got}")]
    TooFewTrials { min: usize, got: usize },

    #[error("nesting factor alpha must be >= 2, got {0}")]
    InvalidAlpha(u32),

    #[error("subsampling matrix is singular or malformed: {0}")]
    BadSubsampling(String),

    #[error("payload |det J| = {0} is below 2")]
    PayloadTooSmall(u64),

    #[error("payload |det J| = {payload} exceeds the enumeration cap {cap}")]
    PayloadOverCap { payload: u64, cap: u64 },

    #[error("point is not on the fine lattice")]
    NotOnLattice,

    #[error("message index {index} out of range for payload {payload}")]
    IndexOutOfRange { index: usize, payload: usize },

    #[error("epsilon {epsilon} outside the admissible range for packing radius {packing_radius}")]
    EpsilonOutOfRange { epsilon: f64, packing_radius: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("block {index}: {source}")]
    Block {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("empty input")]
    EmptyInput,

    #[error("host signal has zero energy")]
    ZeroEnergy,

    #[error("block dimension must be >= 1")]
    InvalidBlockSize,

    #[error("bits per symbol must be in 1..=16, got {0}")]
    InvalidBitsPerSymbol(u32),

    #[error("payload {0} is not a power of two; stream packing needs 2^k cosets")]
    NotPowerOfTwo(usize),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("unsupported WFDB signal format {0} (only 212 is read)")]
    UnsupportedFormat(u32),

    #[error("signal data truncated: need {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },

    #[error("channel {channel} out of range for {available} signals")]
    ChannelOutOfRange { channel: usize, available: usize },

    #[error("message needs {required} blocks but the host provides {available}")]
    Capacity { required: usize, available: usize },

    #[error("missing metadata: {0}")]
    MissingMetadata(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_block(self, index: usize) -> Self {
        Error::Block {
            index,
            source: Box::new(self),
        }
    }

    /// Process exit code for the CLI: 1 for usage/configuration problems,
    /// 2 for data, format and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidAlpha(_)
            | Error::InvalidScale(_)
            | Error::InvalidRadiusHint
            | Error::TooFewTrials { .. }
            | Error::EpsilonOutOfRange { .. }
            | Error::InvalidBitsPerSymbol(_)
            | Error::InvalidBlockSize
            | Error::PayloadTooSmall(_)
            | Error::PayloadOverCap { .. }
            | Error::NotPowerOfTwo(_) => 1,
            Error::Block { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
