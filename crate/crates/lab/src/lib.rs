//! Scenario runner for the `stlab-core` kernels: JSON configuration, the
//! built-in scenario catalog, the run pipeline, convergence studies and
//! the on-disk report formats.

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod scenarios;
pub mod study;

pub use config::ScenarioConfig;
pub use error::{ConfigError, LabError};
pub use pipeline::{run_scenario, RunManifest, RunOptions, RunOutcome};
pub use study::{run_study, StudyReport};
