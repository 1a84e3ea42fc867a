//! Configuration, file formats and subcommands of the `cbf` tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod fieldfile;
pub mod output;

pub use commands::run_cli;
pub use config::RunConfig;
pub use error::{CliError, CliResult};
