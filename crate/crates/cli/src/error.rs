//! CLI error taxonomy and the exit-code contract:
//! 0 success, 2 configuration error, 3 numeric failure, 4 infeasible
//! design, 1 anything else (IO).

use stosync::conditions::ConditionsError;
use stosync::metrics::MetricsError;
use stosync::models::ModelError;
use stosync::sde::SdeError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("infeasible design: {0}")]
    Infeasible(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SdeError> for CliError {
    fn from(e: SdeError) -> Self {
        match e {
            SdeError::Blowup { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<ConditionsError> for CliError {
    fn from(e: ConditionsError) -> Self {
        match e {
            ConditionsError::LayerCannotCertify { .. }
            | ConditionsError::LayerDisconnected { .. } => CliError::Infeasible(e.to_string()),
            ConditionsError::Linalg(_) => CliError::Numeric(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
