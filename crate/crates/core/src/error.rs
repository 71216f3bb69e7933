use std::path::PathBuf;

use crate::factorization::FactorizationResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e}, target {target:e})"
    )]
    EigenNonConvergence {
        sweeps: usize,
        off_norm: f64,
        target: f64,
    },

    #[error("step size underflow before any accepted step (best objective {:e})", .best.final_objective())]
    StepUnderflow { best: Box<FactorizationResult> },

    #[error("did not converge: {0}")]
    NotConverged(String),
    #[error("single-class input: binary training needs both +1 and -1 labels")]
    SingleClass,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

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

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// Wraps the error with a description of what was being processed.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error once all context layers are peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of an iterative numerical method.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::EigenNonConvergence { .. }
                | Error::StepUnderflow { .. }
                | Error::NotConverged(_)
        )
    }

    /// Short machine-readable category.
    pub fn code(&self) -> &'static str {
        match self.root() {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NonFinite { .. } => "non-finite",
            Error::EigenNonConvergence { .. } => "eigen-non-convergence",
            Error::StepUnderflow { .. } => "step-underflow",
            Error::NotConverged(_) => "non-convergence",
            Error::SingleClass => "single-class",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Context { .. } => unreachable!("root() strips context"),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
