use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation point {x} outside [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("no sign change found for {what} in [{lo}, {hi}]; trace: {trace}")]
    BracketNotFound {
        what: &'static str,
        lo: f64,
        hi: f64,
        trace: String,
    },

    #[error("non-positive concentration {value:e} encountered at z = {z}")]
    NonPositiveConcentration { z: f64, value: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigenvalue solver failed: {0}")]
    Eigen(String),

    #[error("no feasible neutral point in the scanned wavenumber range")]
    EmptyFeasibleSet,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Solver failures as opposed to bad inputs.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::BracketNotFound { .. }
                | Error::NonPositiveConcentration { .. }
                | Error::Integration(_)
                | Error::Eigen(_)
                | Error::EmptyFeasibleSet
        )
    }
}
