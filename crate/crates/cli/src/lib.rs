//! Reproducibility entry point for the PT-symmetric cavity simulator:
//! JSON configuration, named scenarios, parameter sweeps and deterministic
//! CSV/JSON outputs.

use std::path::PathBuf;

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{load_config, parse_config, ExperimentSpec, Scenario};
pub use experiment::{derive_params, run_experiment, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure in {context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: pt_cavity::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} check(s) failed")]
    CheckFailed { failed: usize },
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures, 4 for failed checks, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::CheckFailed { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }
}
