//! Command-line front end for `hkq-core`: JSON file formats, the report
//! printer and the `hkq` verbs.

pub mod commands;
pub mod error;
pub mod files;
pub mod output;

pub use commands::{run, Cli, Command, Output};
pub use error::CliError;
