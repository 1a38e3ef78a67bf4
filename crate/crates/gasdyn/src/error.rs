use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] idplim_core::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("non-finite state in cell {cell} at t = {time}: {state:?}")]
    NonFinite { cell: usize, time: f64, state: Vec<f64> },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("run check failed: {0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
