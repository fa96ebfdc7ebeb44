use hawkes_core::HawkesError;
use thiserror::Error;

/// Failure of a CLI verb, mapped onto the stable exit-code contract.
#[derive(Error, Debug)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("assumption audit failed: {0}")]
    Assumption(String),
    #[error("{0}")]
    Runtime(String),
    #[error("checks failed: {}", .0.join(", "))]
    ChecksFailed(Vec<String>),
}

impl CliError {
    /// 0 pass, 1 runtime failure or failed checks, 2 schema, 3 assumptions.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Runtime(_) | Self::ChecksFailed(_) => 1,
            Self::Schema(_) => 2,
            Self::Assumption(_) => 3,
        }
    }
}

impl From<HawkesError> for CliError {
    fn from(e: HawkesError) -> Self {
        match e {
            HawkesError::AssumptionViolation(m) => Self::Assumption(m),
            HawkesError::Config(m) => Self::Schema(m),
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}
