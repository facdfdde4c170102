use thiserror::Error;

/// Errors produced by the geometry kernels and pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (supported range is 2..=16)")]
    UnsupportedDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid is not uniform at sample {index}")]
    NonUniformGrid { index: usize },

    #[error("need at least {needed} samples, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    /// The first `k` vectors of a system are numerically dependent.
    #[error("volume of the first {k} vectors collapsed (normalized volume {normalized:e})")]
    CollapsedVolume { k: usize, normalized: f64 },

    #[error("gram block of size {k} is not positive definite at t = {t}")]
    NotPositiveDefinite { t: f64, k: usize },

    #[error("numerical blow-up: {0}")]
    BlowUp(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification of an [`Error`], used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    Degenerate,
    Numerical,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::CollapsedVolume { .. } | Error::NotPositiveDefinite { .. } => {
                ErrorCategory::Degenerate
            }
            Error::BlowUp(_) => ErrorCategory::Numerical,
            _ => ErrorCategory::Input,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
