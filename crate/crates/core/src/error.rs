use std::path::PathBuf;

use crate::tokenstream::DecodeErrorKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("ineligible character {0:02X} {1:02X} {2:02X}: lead must be E4..EF followed by two continuation bytes")]
    IneligibleChar(u8, u8, u8),

    #[error("payload value {0} does not fit in 9 bits")]
    PayloadOutOfRange(u16),

    #[error("token at offset {position} is not in baseline form (expected subword or byte)")]
    NotBaseline { position: usize },

    #[error("strict decode failed at offset {position}: {kind}")]
    Decode {
        kind: DecodeErrorKind,
        position: usize,
    },

    #[error("vocabulary mismatch: {0}")]
    Vocab(String),

    #[error("unknown token id {0}")]
    UnknownId(u32),

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),

    #[error("vocabulary size must be at least 2, got {0}")]
    VocabTooSmall(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
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

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::Vocab(_) | Error::UnknownId(_) => 4,
            Error::Decode { .. } => 5,
            Error::Parse { .. } | Error::Json(_) | Error::Csv(_) | Error::NotBaseline { .. } => 6,
            Error::IneligibleChar(..) | Error::PayloadOutOfRange(_) => 7,
            Error::EmptyHistogram
            | Error::InvalidAlpha(_)
            | Error::VocabTooSmall(_)
            | Error::InvalidArgument(_) => 8,
        }
    }
}
