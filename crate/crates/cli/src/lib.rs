//! Configuration, initial data and experiment drivers behind the `etdrk`
//! command-line tool.

pub mod config;
pub mod error;
pub mod experiments;
pub mod init;
pub mod simulate;

pub use config::{InitialCondition, Nodes, PotentialSpec, RunConfig, Setup};
pub use error::{CliError, Result};
pub use experiments::{cmd_converge, cmd_energy_test, cmd_mbp_test, cmd_run, cmd_tables, Reference};
