//! Scenario runner for the ion-photon QFC simulator: config handling,
//! named scenarios with file artifacts, and parameter sweeps.

pub mod config;
pub mod error;
pub mod scenarios;

pub use config::Config;
pub use error::{CliError, CliResult};
