//! Command implementations and the reproducible experiment harness behind
//! the `lpgeom` binary.

pub mod commands;
pub mod error;
pub mod experiments;
pub mod io;

pub use error::{CliError, CliResult};
pub use experiments::{run_experiment, ExperimentConfig, ExperimentName, PropertyVerdict, Verdict};
