use std::io;
use std::path::{Path, PathBuf};

use kas_core::assembly::AssemblyError;
use kas_core::embedding::EmbedError;
use kas_core::evaluation::EvalError;
use kas_core::knowledge::KnowledgeError;
use kas_core::ranking::RankError;
use kas_core::transcript::TranscriptError;

/// Process exit codes.
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SERVICE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Service(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => EXIT_VALIDATION,
            Error::Io { .. } => EXIT_IO,
            Error::Service(_) => EXIT_SERVICE,
        }
    }
}

impl From<TranscriptError> for Error {
    fn from(e: TranscriptError) -> Self {
        Error::Validation(e.to_string())
    }
}

impl From<KnowledgeError> for Error {
    fn from(e: KnowledgeError) -> Self {
        Error::Validation(e.to_string())
    }
}

impl From<EvalError> for Error {
    fn from(e: EvalError) -> Self {
        Error::Validation(e.to_string())
    }
}

impl From<EmbedError> for Error {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::Transport(_) | EmbedError::Protocol(_) => Error::Service(e.to_string()),
            _ => Error::Validation(e.to_string()),
        }
    }
}

impl From<RankError> for Error {
    fn from(e: RankError) -> Self {
        match e {
            RankError::Embed(inner) => inner.into(),
            RankError::VectorCount { .. } => Error::Service(e.to_string()),
            RankError::LengthMismatch { .. } => Error::Validation(e.to_string()),
        }
    }
}

impl From<AssemblyError> for Error {
    fn from(e: AssemblyError) -> Self {
        match e {
            AssemblyError::Generator { .. } => Error::Service(e.to_string()),
            _ => Error::Validation(e.to_string()),
        }
    }
}
