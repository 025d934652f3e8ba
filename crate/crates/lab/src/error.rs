use lqg_core::LqgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Bad configuration or command-line input.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] LqgError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// 2 for invalid input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(
                LqgError::Factorization { .. }
                | LqgError::ConditioningExhausted { .. }
                | LqgError::Domain(_),
            ) => 3,
            _ => 2,
        }
    }
}
