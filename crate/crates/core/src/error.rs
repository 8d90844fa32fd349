use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("no bound state: {0}")]
    NoBoundState(String),

    #[error("Hilbert space dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures caused by the requested parameters rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_) | Error::Domain(_) | Error::DimensionOverflow { .. } | Error::Unsupported(_)
        )
    }

    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::NoBoundState(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
