use std::io;

use thiserror::Error;

/// Errors raised by the analysis pipeline and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero quaternion has no polar form")]
    ZeroQuaternion,

    #[error("signal has zero energy")]
    ZeroEnergy,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("missing or malformed header, expected `{expected}`")]
    MissingHeader { expected: String },

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("non-uniform time base at row {row}")]
    NonUniformTime { row: usize },

    #[error("bad magic: expected QTF1")]
    BadMagic,

    #[error("invalid grid header: {0}")]
    BadHeader(String),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
