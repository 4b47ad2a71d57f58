use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "HYBRIDLAB_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Parser)]
#[command(name = "hybridlab", version, about = "Hybrid coding bounds, Gaussian relay rates and random-coding simulation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct GlobalOpts {
    /// Directory receiving the outputs and manifest.json.
    #[arg(long, global = true, default_value = "hybridlab-out")]
    pub out_dir: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Root seed. Precedence: this flag, then $HYBRIDLAB_SEED, then the scenario.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    AsPrinted,
    BetaSubstituted,
    Rederived,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thm3Arg {
    AsPrinted,
    Mirrored,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Gaussian two-way relay: optimized rates per scheme, optional distance sweep.
    BoundsTwrc {
        scenario: PathBuf,
        /// Also write the distance sweep as fig8.csv.
        #[arg(long)]
        sweep: bool,
        /// Reading of the general-scheme closed form.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Deterministic diamond network: hybrid, independent-input and cutset bounds.
    BoundsDiamond { scenario: PathBuf },
    /// Multiple access region check, optionally under the lossless (--cor1) or
    /// distributed-compression (--cor2) substitution.
    RegionMac {
        scenario: PathBuf,
        #[arg(long)]
        cor1: bool,
        #[arg(long)]
        cor2: bool,
    },
    /// Point-to-point condition I(S;U) < I(U;Y) for a spec, or a grid search.
    CheckThm1 {
        scenario: PathBuf,
        #[arg(long)]
        optimize: bool,
        /// Target distortion for --optimize.
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        aux_cap: Option<usize>,
        /// Grid denominator (coordinates are multiples of 1/grid).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Discrete two-way relay region check.
    CheckThm3 {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "as-printed")]
        variant: Thm3Arg,
    },
    /// Random-coding simulation (p2p or mac), or the codebook-dependence check.
    Simulate {
        scenario: PathBuf,
        /// Block lengths, comma separated; overrides the scenario.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// Run the codebook-dependence check from the scenario's lemma1 section.
        #[arg(long)]
        lemma1: bool,
        /// Also write per-trial CSV files.
        #[arg(long)]
        per_trial: bool,
    },
    /// Line plot of a CSV (first column x, one series per further column) as SVG.
    Plot {
        csv: PathBuf,
        /// Output file name inside --out-dir.
        #[arg(long, default_value = "plot.svg")]
        output: String,
    },
    /// Re-run a manifest and compare output digests.
    #[serde(skip)]
    Replay {
        manifest: PathBuf,
        /// Where the replayed outputs go; defaults to <manifest dir>/replay.
        #[arg(long)]
        replay_dir: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::BoundsTwrc { .. } => "bounds-twrc",
            Command::BoundsDiamond { .. } => "bounds-diamond",
            Command::RegionMac { .. } => "region-mac",
            Command::CheckThm1 { .. } => "check-thm1",
            Command::CheckThm3 { .. } => "check-thm3",
            Command::Simulate { .. } => "simulate",
            Command::Plot { .. } => "plot",
            Command::Replay { .. } => "replay",
        }
    }

    /// The input file the command reads.
    pub fn input(&self) -> Option<&PathBuf> {
        match self {
            Command::BoundsTwrc { scenario, .. }
            | Command::BoundsDiamond { scenario }
            | Command::RegionMac { scenario, .. }
            | Command::CheckThm1 { scenario, .. }
            | Command::CheckThm3 { scenario, .. }
            | Command::Simulate { scenario, .. } => Some(scenario),
            Command::Plot { csv, .. } => Some(csv),
            Command::Replay { .. } => None,
        }
    }

    pub fn input_mut(&mut self) -> Option<&mut PathBuf> {
        match self {
            Command::BoundsTwrc { scenario, .. }
            | Command::BoundsDiamond { scenario }
            | Command::RegionMac { scenario, .. }
            | Command::CheckThm1 { scenario, .. }
            | Command::CheckThm3 { scenario, .. }
            | Command::Simulate { scenario, .. } => Some(scenario),
            Command::Plot { csv, .. } => Some(csv),
            Command::Replay { .. } => None,
        }
    }
}

/// `--seed`, then `$HYBRIDLAB_SEED`, then `fallback`.
pub fn resolve_seed(flag: Option<u64>, fallback: u64) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{SEED_ENV}={v} is not an unsigned integer")),
        Err(_) => Ok(fallback),
    }
}
