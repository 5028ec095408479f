use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the library.
///
/// Validation problems (bad geometry, bad parameters) are separated from
/// solver failures so the CLI can map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("zero vector")]
    ZeroVector,

    #[error("pole hits spectrum: singular pivot at row {row} for shift {shift}")]
    SingularPivot { row: usize, shift: Complex64 },

    #[error("orthonormalization dropped every vector")]
    RankZero,

    #[error("dense eigensolver failed to converge (best residual {best_residual:e})")]
    DenseEig { best_residual: f64 },

    #[error("argument-principle count failed: {0}")]
    RootNearContour(String),

    #[error("root search incomplete: contour count {expected}, found {found} roots")]
    IncompleteRoots {
        expected: i64,
        found: usize,
        roots: Vec<Complex64>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by the caller's input rather than by a solver.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Invalid(_) | Error::Config { .. } | Error::LengthMismatch { .. } => true,
            Error::Context { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
