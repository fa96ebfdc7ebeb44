use thiserror::Error;

/// Errors raised by model construction, simulation, solvers and estimators.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum HawkesError {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid intensity function: {0}")]
    InvalidIntensity(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),
    #[error("event count exceeded the explosion guard of {limit} events (replica {replica})")]
    ExplosionGuard { limit: usize, replica: u64 },
    #[error("internal logic error: {0}")]
    InternalLogic(String),
    #[error("Picard iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },
    #[error("model violation: {0}")]
    ModelViolation(String),
    #[error("missing capability: {0}")]
    Capability(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("line search stagnated after {iterations} iterations (best value {best_value:e})")]
    Stagnation { iterations: usize, best_value: f64 },
    #[error("infeasible constraint: {0}")]
    Constraint(String),
    #[error("gradient check failed: max relative discrepancy {0:e}")]
    GradientMismatch(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = HawkesError> = std::result::Result<T, E>;

impl From<std::io::Error> for HawkesError {
    fn from(e: std::io::Error) -> Self {
        HawkesError::Io(e.to_string())
    }
}

impl From<csv::Error> for HawkesError {
    fn from(e: csv::Error) -> Self {
        HawkesError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HawkesError {
    fn from(e: serde_json::Error) -> Self {
        HawkesError::Io(e.to_string())
    }
}
