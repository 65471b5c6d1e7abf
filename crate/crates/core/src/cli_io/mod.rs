//! Configuration, input ingestion, the end-to-end pipeline and report views.

mod config;
mod inputs;
mod pipeline;
mod report;

pub use config::{FamilySource, RunConfig, SubsetSelector};
pub use inputs::{load_family, parse_family_csv, parse_family_json, resolve_subset};
pub use pipeline::{check_partition, load_inputs, run, Inputs, PartitionCheck, RunOutcome, RunReport};
pub use report::flatten_report_csv;

use thiserror::Error;

use crate::metric_space::load::LoadError;

/// Failure of a CLI step, carrying its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input: exit 2.
    #[error("{0}")]
    Input(String),
    /// A certified invariant failed: exit 1.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 1,
        }
    }

    pub fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Input(e.to_string())
    }
}
