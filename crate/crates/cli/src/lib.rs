//! Configuration, output writers and subcommands of the `stirap` tool.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Cli, Command, Options};
pub use config::{ConfigError, Format, RunConfig};
