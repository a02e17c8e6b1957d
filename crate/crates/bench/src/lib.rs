//! Benchmark harness for the voting library: generate instances, run any
//! algorithm on any model, and report operation counts as CSV and JSON.

pub mod compare;
pub mod config;
pub mod report;
pub mod run;
pub mod verify;

pub use compare::{compare_algorithms, predicted_exponent, Comparison, Crossover};
pub use config::{Algo, ExperimentConfig, GenParams, InstanceSource, RansacSettings, Sweep, SweepAxis};
pub use report::{read_csv, Aggregate, CsvRow, Quartiles, RunRecord, RunReport, CSV_HEADER};
pub use run::{generate, run_algorithm, run_experiment, tolerance, RunOptions};
pub use verify::{verified_ids, verify_inliers};

/// Usage errors map to exit code 2, everything else to 1.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Core(#[from] ivote_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 2,
            BenchError::Core(ivote_core::Error::UnknownModel(_))
            | BenchError::Core(ivote_core::Error::NoMinimalSolver(_))
            | BenchError::Core(ivote_core::Error::InvalidTolerance(_)) => 2,
            _ => 1,
        }
    }
}

/// Thread count from `IVOTE_THREADS`, which overrides `flag`.
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>, BenchError> {
    match std::env::var("IVOTE_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| BenchError::Usage(format!("IVOTE_THREADS={v} is not a positive integer"))),
        _ => Ok(flag),
    }
}
