use std::path::PathBuf;

/// Errors produced by the embias library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed embedding file: {0}")]
    Format(String),

    #[error("duplicate token {0:?}")]
    DuplicateToken(String),

    #[error("invalid token {0:?}: tokens must be non-empty and contain no whitespace")]
    InvalidToken(String),

    #[error("non-finite value in vector for {0:?}")]
    NonFinite(String),

    #[error("out-of-vocabulary token {0:?}")]
    OutOfVocabulary(String),

    #[error("zero-norm vector: {0}")]
    ZeroVector(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("solver diverged: {0}")]
    Diverged(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("rating data error: {0}")]
    Ratings(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
