//! Configuration parsing, command dispatch and plotting for the `structmc`
//! command-line tool.

pub mod config;
mod error;
pub mod run;
pub mod svg;

pub use config::{parse_config, Command, RunConfig};
pub use error::CliError;
pub use run::run;
