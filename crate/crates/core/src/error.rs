use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A law, kernel or configuration parameter is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    /// Wrong number of inputs, or mismatched lengths.
    #[error("arity error: {0}")]
    Arity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Gram-Schmidt residual fell below tolerance at the given row.
    #[error("degenerate input: residual of row {row} is {residual:e}")]
    Degenerate { row: usize, residual: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("matrix is not positive semi-definite: {0}")]
    NotPsd(String),

    #[error("theta = {theta} overflows the moment generating function")]
    GridRange { theta: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures of the filesystem rather than of the computation.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
