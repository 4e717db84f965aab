//! Experiment runner and command-line front end for `rmcorr`.
//!
//! Sweeps are described by a JSON [`config::SweepConfig`] and produce CSV
//! tables with one row per grid point; every statistical row carries the
//! exact oracle value next to the estimate.

pub mod commands;
pub mod config;
pub mod error;
pub mod regress;
pub mod state_spec;
pub mod sweep;
pub mod table;
pub mod verify;

pub use config::{Experiment, SweepConfig};
pub use error::{CliError, CliResult};
pub use regress::{regress, RegressionResult};
pub use sweep::{run_sweep, SweepOutput};
