//! Batch front end for the `cmc-orbit` library: shoot, solve, assemble,
//! verify and sweep, writing CSV, JSON and SVG.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use config::{Cli, RunConfig};
pub use error::CliError;

/// What `main` should do once a run finishes.
#[derive(Debug)]
pub enum Outcome {
    Ok,
    /// Help or version text for stdout.
    Info(String),
    Err(CliError),
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self {
            Outcome::Ok | Outcome::Info(_) => 0,
            Outcome::Err(e) => e.exit_code(),
        }
    }
}

pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Outcome::Info(e.to_string());
        }
        Err(e) => return Outcome::Err(CliError::config(e.render().to_string().trim())),
    };
    match RunConfig::resolve(&cli.command).and_then(|cfg| commands::run(&cfg)) {
        Ok(()) => Outcome::Ok,
        Err(e) => Outcome::Err(e),
    }
}
