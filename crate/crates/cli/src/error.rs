use std::path::PathBuf;

use thiserror::Error;

use twufp_core::approx::ApproxError;
use twufp_core::exact::OracleError;
use twufp_core::hardness::HardnessError;
use twufp_core::instance::ScheduleError;
use twufp_core::io::IoError;
use twufp_core::numeric::NumericError;
use twufp_core::reductions::ReductionError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Limits(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Infeasible(_) => 1,
            CliError::Usage(_) | CliError::File { .. } => 2,
            CliError::Limits(_) => 3,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Hardness(h) => h.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<NumericError> for CliError {
    fn from(e: NumericError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::LimitsExceeded(_) => CliError::Limits(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<ApproxError> for CliError {
    fn from(e: ApproxError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<HardnessError> for CliError {
    fn from(e: HardnessError) -> Self {
        match e {
            HardnessError::Infeasible(_) | HardnessError::Structural(_) => CliError::Infeasible(e.to_string()),
            HardnessError::LimitsExceeded(_) => CliError::Limits(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}
