use thiserror::Error;

/// Errors produced by environment construction, solvers and experiment drivers.
#[derive(Debug, Error)]
pub enum RcmError {
    /// A constructor argument is outside its admissible range. Carries the
    /// offending field name so config validation can point at it.
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: String, message: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    /// Kernel operations reject vertices with pi(x) = 0.
    #[error("degenerate vertex {vertex}: pi = 0")]
    DegenerateVertex { vertex: usize },

    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("selection error: {0}")]
    Selection(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl RcmError {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        RcmError::InvalidParameter {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, RcmError>;
