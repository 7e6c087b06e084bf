use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WntError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Legendre inversion did not converge after {iterations} iterations (residual {residual:.3e})")]
    InversionFailed { iterations: usize, residual: f64 },

    #[error("oracle radius {radius} too small: argmax lies on the sampling boundary")]
    RadiusTooSmall { radius: f64 },

    #[error("degenerate fiber: {0}")]
    DegenerateFiber(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("time step {dt:.3e} exceeds stability bound {bound:.3e}")]
    StepRejected { dt: f64, bound: f64 },

    #[error("configuration too tight: {0}")]
    ConfigurationTooTight(String),

    #[error("vortex collision: separation {separation:.3e} below {min:.3e}")]
    Collision { separation: f64, min: f64 },

    #[error("filament collapse: {0}")]
    Collapse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for WntError {
    fn from(e: std::io::Error) -> Self {
        WntError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for WntError {
    fn from(e: serde_json::Error) -> Self {
        WntError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, WntError>;
