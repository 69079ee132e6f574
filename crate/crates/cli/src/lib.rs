//! Batch runner: reads a JSON run config, evaluates its scenarios in parallel
//! and writes CSV or JSON tables.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, CliError, CommandKind, RunOptions};
pub use config::{ConfigError, Format, RunConfig};
