//! Experiment orchestration for the `hk` command line tool.

pub mod config;
pub mod report;
pub mod run;
pub mod suites;

pub use config::{Experiment, ExperimentConfig, Grids};
pub use report::{fit_constant, CheckRow, RunReport, Sides, Suite};
pub use run::run;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hk_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code: 2 for bad input, 1 for anything that went wrong while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            _ => 1,
        }
    }
}
