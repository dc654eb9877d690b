use std::io;

use milp::MilpError;
use thiserror::Error;

/// Problems found while reading a scenario bundle. Every variant names the
/// offending file, and the key or line where it applies.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{file}: {source}")]
    Io { file: String, source: io::Error },
    #[error("{file}: {msg}")]
    Parse { file: String, msg: String },
    #[error("{file}: key `{key}`: {msg}")]
    Field { file: String, key: String, msg: String },
    #[error("{file}:{line}: {msg}")]
    Series { file: String, line: usize, msg: String },
}

#[derive(Debug, Error)]
pub enum FerryError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("scenario is invalid: {0}")]
    Invalid(String),
    #[error("vessel {vessel} leg {leg}: {msg}")]
    Linearize { vessel: String, leg: usize, msg: String },
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("unknown experiment {0} (expected 1-4)")]
    UnknownExperiment(u8),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("{found} free binaries exceed the enumeration limit of {limit}")]
    TooManyBinaries { found: usize, limit: usize },
    #[error("solution file {file}:{line}: {msg}")]
    SolutionFile { file: String, line: usize, msg: String },
    #[error("experiment {experiment}: solver finished with status {}", status.as_str())]
    Unsolved {
        experiment: u8,
        status: crate::solver::SolveStatus,
    },
    #[error("experiment {experiment}: {msg}")]
    Experiment { experiment: u8, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}
