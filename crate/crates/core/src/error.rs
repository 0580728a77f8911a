use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quaternion: {0}")]
    InvalidQuaternion(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("time index {index} out of range for sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("sequence too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("sensor `{sensor}` references unknown joint {joint}")]
    UnknownJoint { sensor: String, joint: usize },

    #[error("placement swap failed, unmatched sensors: {}", .0.join(", "))]
    UnmatchedSensors(Vec<String>),

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("length mismatch in `{field}`: expected {expected}, found {found}")]
    LengthMismatch {
        field: String,
        expected: usize,
        found: usize,
    },

    #[error("csv error at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error(transparent)]
    Frame(#[from] FrameError),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Wire-format failures. Each kind is distinct so stream consumers can react
/// differently to corruption and to version skew.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported frame version {0}")]
    UnsupportedVersion(u16),

    #[error("unsupported dtype tag {0}")]
    UnsupportedDtype(u16),

    #[error("crc mismatch: frame says {expected:#010x}, payload hashes to {actual:#010x}")]
    CrcMismatch { expected: u32, actual: u32 },

    #[error("truncated frame: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },

    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),

    #[error("frame shape overflow")]
    ShapeOverflow,

    #[error("frame of {0} bytes exceeds the stream limit")]
    Oversized(u32),

    #[error("windows in one batch differ in shape")]
    RaggedWindows,
}
