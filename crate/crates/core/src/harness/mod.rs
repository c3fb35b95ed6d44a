//! Experiment configuration, sweeps, CSV reports and the command line.

pub mod cli;
pub mod config;
pub mod report;
pub mod sweep;
pub mod verify;

use std::path::{Path, PathBuf};

pub use cli::run_cli;
pub use config::{ExperimentConfig, InstanceSpec, MechanismSpec, ModelPreset, ModelSpec, SweepAxis, SweepSection};
pub use report::{emit_csv, read_summary, SummaryRow, TraceWriter, SUMMARY_HEADER, TRACE_HEADER};
pub use sweep::{run_experiment, run_replication, run_summary, run_sweep, ReplicationOutcome, SweepSpec};
pub use verify::{verify_suite, CheckOutcome};

/// Errors raised by the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] crate::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{0} verification check(s) failed")]
    Verification(usize),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn csv(path: &Path, source: csv::Error) -> Self {
        Self::Csv { path: path.to_path_buf(), source }
    }

    /// Process exit status: 1 for failed checks, 2 for bad input or unusable paths.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification(_) => 1,
            _ => 2,
        }
    }
}
