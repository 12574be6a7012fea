//! Command-line front end: argument parsing, report assembly and rendering.

pub mod commands;
pub mod forms;
pub mod report;

pub use commands::{run, sweeper, Cli, CliError, Command};
pub use report::{CheckOutcome, RunConfig, RunReport, Timings};
