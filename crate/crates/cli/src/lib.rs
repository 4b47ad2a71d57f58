//! Command-line front end: JSON scenario ingestion, one subcommand per
//! bound family, CSV/JSON reports with run manifests, and SVG line plots.

pub mod cli;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod plot;
pub mod scenario;

pub use error::{CliError, Result};

use cli::{Cli, Command};

/// Runs a parsed command line; returns the text printed on success.
pub fn run(cli: Cli) -> Result<String> {
    match &cli.command {
        Command::Replay { manifest, replay_dir } => {
            let r = commands::replay(manifest, replay_dir.as_deref(), cli.global.jobs)?;
            serde_json::to_string_pretty(&r).map_err(|e| CliError::Internal(e.to_string()))
        }
        cmd => {
            let o = commands::execute(cmd, &cli.global.out_dir, cli.global.jobs, cli.global.seed)?;
            Ok(format!("{}: {}\nmanifest: {}", o.manifest.subcommand, o.summary, o.manifest_path.display()))
        }
    }
}
