//! Command-line surface of azulift: file formats and subcommands.

pub mod commands;
pub mod format;

pub use commands::{run, CliError};
