use idplim_core::Error as CoreError;
use idplim_gasdyn::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error("{0}")]
    Usage(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0} self-test check(s) failed")]
    SelftestFailed(usize),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::NotConverged { .. } => EXIT_NOT_CONVERGED,
        CoreError::Infeasible(_) => EXIT_INFEASIBLE,
        CoreError::Io(_)
        | CoreError::Parse(_)
        | CoreError::Json(_)
        | CoreError::Csv(_)
        | CoreError::InvalidArgument(_)
        | CoreError::DimensionMismatch { .. } => EXIT_CONFIG,
        CoreError::DivisionByZero(_) | CoreError::NonFinite(_) => EXIT_FAILURE,
    }
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => core_code(e),
            CliError::Sim(SimError::Core(e)) => core_code(e),
            CliError::Sim(SimError::Config(_) | SimError::Io(_) | SimError::Json(_) | SimError::Csv(_)) => EXIT_CONFIG,
            CliError::Sim(SimError::NonFinite { .. } | SimError::Check(_)) => EXIT_FAILURE,
            CliError::Usage(_) | CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => EXIT_CONFIG,
            CliError::SelftestFailed(_) => EXIT_FAILURE,
        }
    }
}
