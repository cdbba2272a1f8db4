//! Scenario runner and cross-engine comparator for the damped Gaussian
//! packet library.
//!
//! A scenario (from a TOML config or an embedded preset) is run by every
//! requested engine for every friction value. Each run writes plain-text
//! tables; the comparator then measures pairwise engine disagreement
//! against tolerance rules.

pub mod compare;
pub mod config;
pub mod expr;
pub mod presets;
pub mod run;
pub mod tolerance;

use std::path::{Path, PathBuf};

pub use compare::{compare_dir, ComparisonReport, ReportEntry};
pub use config::{ConfigError, ScenarioConfig};
pub use run::run_scenario;
pub use tolerance::{Engine, Quantity, Tolerances};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("tolerance file: {0}")]
    Tolerance(#[from] tolerance::ToleranceError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot align outputs: {0}")]
    Alignment(String),
    #[error("numerical failure ({context}): {source}")]
    Numerical { context: String, source: viscid_core::Error },
}

/// Process exit statuses.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const TOLERANCE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// Input problems map to the config status, engine failures to the
    /// numerical one.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } => exit::NUMERICAL,
            _ => exit::CONFIG,
        }
    }
}
