use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix does not have the length another argument requires.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// An argument is outside its documented domain (negative t, NaN entries, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exact computation would exceed its enumeration cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The requested operation is not defined for this space or mode.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Scenario files that fail to parse or validate.
    #[error("scenario error: {0}")]
    Scenario(String),

    /// An error from a named pipeline stage.
    #[error("stage `{stage}`: {source}")]
    Staged {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Capacity,
}

impl Error {
    /// Attach a pipeline stage name to the error.
    pub fn staged(self, stage: &'static str) -> Self {
        Error::Staged {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost classification, looking through `Staged` wrappers.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Capacity(_) => ErrorKind::Capacity,
            Error::Staged { source, .. } => source.kind(),
            _ => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
