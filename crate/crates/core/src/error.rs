use thiserror::Error;

/// Failures reported by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("no convergence: {message} (best value {best_value})")]
    NonConvergence { message: String, best_value: f64 },
    #[error("linear solver stagnated after {iterations} iterations (relative residual {final_residual:.3e})")]
    Solver {
        iterations: usize,
        final_residual: f64,
        residual_history: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
