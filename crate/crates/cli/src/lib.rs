//! Library side of the `tvpoint` command-line tool.

pub mod commands;
pub mod error;
pub mod eventfile;
pub mod report;
pub mod study;

pub use commands::{run, Cli};
pub use error::{CliError, Result};
