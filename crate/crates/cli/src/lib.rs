//! Command-line front end for the `twoconn-core` simulator: graph files,
//! JSON reports, DOT export and parameter sweeps.

pub mod commands;
pub mod dot;
pub mod graph_file;
pub mod report;
pub mod specs;

pub use commands::{execute, Cli, CliError};
