use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state index {index} outside 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("too few levels: need at least {needed}, found {found}")]
    TooFewLevels { needed: usize, found: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// An owned copy, for errors that are cached and reported to several
    /// callers. I/O errors keep their kind and message only.
    pub(crate) fn duplicate(&self) -> Self {
        match self {
            Error::NonFinite { row, col } => Error::NonFinite { row: *row, col: *col },
            Error::NotSymmetric { row, col } => Error::NotSymmetric { row: *row, col: *col },
            Error::DimensionMismatch { expected, found } => Error::DimensionMismatch {
                expected: *expected,
                found: *found,
            },
            Error::NoConvergence { dim } => Error::NoConvergence { dim: *dim },
            Error::InvalidParameter(m) => Error::InvalidParameter(m.clone()),
            Error::IndexOutOfRange { index, dim } => Error::IndexOutOfRange {
                index: *index,
                dim: *dim,
            },
            Error::TooFewLevels { needed, found } => Error::TooFewLevels {
                needed: *needed,
                found: *found,
            },
            Error::Degenerate(m) => Error::Degenerate(m.clone()),
            Error::Config(v) => Error::Config(v.clone()),
            Error::Io(e) => Error::Io(std::io::Error::new(e.kind(), e.to_string())),
        }
    }
}
