use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Domain,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: domain error: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("{op}: precondition violated: {msg}")]
    Precondition { op: &'static str, msg: String },

    #[error("{op}: regime error: {msg}")]
    Regime { op: &'static str, msg: String },

    #[error("{op}: meshes cannot be conformed: {msg}")]
    MeshIncompatible { op: &'static str, msg: String },

    #[error("{op}: no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        op: &'static str,
        iterations: usize,
        residual: f64,
        /// Residual norms (or damping factors) recorded along the way.
        trace: Vec<f64>,
    },

    #[error("{op}: quadrature failed: {msg}")]
    Quadrature { op: &'static str, msg: String },

    #[error("{op}: inconclusive: {msg}")]
    Inconclusive { op: &'static str, msg: String },

    #[error("{op}: {msg}")]
    Scheme { op: &'static str, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain { .. }
            | Error::Precondition { .. }
            | Error::Regime { .. }
            | Error::MeshIncompatible { .. } => ErrorKind::Domain,
            Error::NoConvergence { .. }
            | Error::Quadrature { .. }
            | Error::Inconclusive { .. }
            | Error::Scheme { .. } => ErrorKind::Numerical,
            Error::Io(_) | Error::Json(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    pub(crate) fn precondition(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Precondition { op, msg: msg.into() }
    }

    pub(crate) fn quadrature(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Quadrature { op, msg: msg.into() }
    }
}
