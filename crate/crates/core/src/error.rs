use thiserror::Error;

/// Errors produced by the dynamics library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A retraction or its tangent was evaluated outside its domain. In the
    /// integrator this almost always means the time step is too large for the
    /// per-step displacement of some body.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// An articulated-inertia pivot collapsed below the singularity threshold.
    #[error("singular joint {joint}: articulated inertia pivot {pivot:e}")]
    SingularJoint { joint: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// Wraps an error raised while advancing a trajectory at a given frame;
    /// the cause is reported through `source()`.
    #[error("at frame {frame}")]
    AtFrame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_frame(self, frame: usize) -> Self {
        Error::AtFrame {
            frame,
            source: Box::new(self),
        }
    }

    /// Strips any frame annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtFrame { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_non_convergence(&self) -> bool {
        matches!(self.root(), Error::NonConvergence { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension { expected, actual })
    }
}
