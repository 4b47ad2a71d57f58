//! JSON scenario files. Every file carries `"kind"` and `"version": 1`;
//! pmf arrays are checked to sum to 1 within 1e-9 by the core types.

use std::path::Path;

use hybridlab_core::bounds::diamond::{DetSearchConfig, DiamondChannel, DiamondSpec};
use hybridlab_core::bounds::mac::{MacHybridSpec, MacScenario};
use hybridlab_core::bounds::p2p::{HybridCodeSpec, P2pScenario, Thm1SearchConfig};
use hybridlab_core::bounds::twrc::{TwrcChannel, TwrcSpec};
use hybridlab_core::gaussian::{default_r_grid, GaussOptConfig, GaussianTwrcParams};
use hybridlab_core::infotheory::{ConditionalPmf, DistortionMeasure, JointPmf, Pmf};
use hybridlab_core::sim::{TrialConfig, DEFAULT_EPSILON, DEFAULT_EPSILON_PRIME, DEFAULT_SYMBOL_CAP};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    P2p(P2pFile),
    Mac(MacFile),
    TwrcDiscrete(TwrcFile),
    TwrcGaussian(GaussFile),
    Diamond(DiamondFile),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::P2p(_) => "p2p",
            Scenario::Mac(_) => "mac",
            Scenario::TwrcDiscrete(_) => "twrc_discrete",
            Scenario::TwrcGaussian(_) => "twrc_gaussian",
            Scenario::Diamond(_) => "diamond",
        }
    }

    fn version(&self) -> u32 {
        match self {
            Scenario::P2p(f) => f.version,
            Scenario::Mac(f) => f.version,
            Scenario::TwrcDiscrete(f) => f.version,
            Scenario::TwrcGaussian(f) => f.version,
            Scenario::Diamond(f) => f.version,
        }
    }
}

/// Monte Carlo settings. `n` lists the block lengths of an n-sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_epsilon_prime")]
    pub epsilon_prime: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_cap")]
    pub symbol_cap: u64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_epsilon_prime() -> f64 {
    DEFAULT_EPSILON_PRIME
}

fn default_cap() -> u64 {
    DEFAULT_SYMBOL_CAP
}

impl SimSection {
    pub fn trial_config(&self, n: usize, seed: u64) -> TrialConfig {
        TrialConfig {
            n,
            trials: self.trials,
            epsilon: self.epsilon,
            epsilon_prime: self.epsilon_prime,
            seed,
            symbol_cap: self.symbol_cap,
        }
    }
}

/// `lemma1_check` settings; the seed comes from the run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma1Section {
    pub n: usize,
    pub rate: f64,
    /// `p(u, s)` with dims `[|U|, |S|]`.
    pub joint: JointPmf,
    pub epsilon_prime: f64,
    pub outer_trials: usize,
    #[serde(default = "default_min_count")]
    pub min_count: u64,
}

fn default_min_count() -> u64 {
    100
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct P2pFile {
    pub version: u32,
    #[serde(default)]
    pub description: String,
    pub source: Pmf,
    pub channel: ConditionalPmf,
    pub distortion: DistortionMeasure,
    #[serde(default)]
    pub spec: Option<HybridCodeSpec>,
    #[serde(default)]
    pub target_distortion: Option<f64>,
    #[serde(default)]
    pub search: Thm1SearchConfig,
    #[serde(default)]
    pub simulation: Option<SimSection>,
    #[serde(default)]
    pub lemma1: Option<Lemma1Section>,
}

impl P2pFile {
    pub fn scenario(&self) -> hybridlab_core::Result<P2pScenario> {
        P2pScenario::new(self.source.clone(), self.channel.clone(), self.distortion.clone())
    }
}

/// Lossless substitution inputs: `p(q)` and `p(x_j | s_j, q)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cor1Section {
    pub time_sharing: Pmf,
    pub inputs: [Vec<ConditionalPmf>; 2],
}

/// Distributed-compression substitution inputs over the noiseless MAC.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cor2Section {
    pub time_sharing: Pmf,
    pub quantizers: [Vec<ConditionalPmf>; 2],
    /// `recon[j][q][ũ1][ũ2]`.
    pub recon: [Vec<Vec<Vec<usize>>>; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacFile {
    pub version: u32,
    #[serde(default)]
    pub description: String,
    pub sources: JointPmf,
    pub input_sizes: [usize; 2],
    /// `p(y | x1, x2)`; absent means the noiseless MAC `Y = (X1, X2)`.
    #[serde(default)]
    pub channel: Option<ConditionalPmf>,
    pub distortions: [DistortionMeasure; 2],
    #[serde(default)]
    pub spec: Option<MacHybridSpec>,
    #[serde(default)]
    pub cor1: Option<Cor1Section>,
    #[serde(default)]
    pub cor2: Option<Cor2Section>,
    #[serde(default)]
    pub simulation: Option<SimSection>,
}

impl MacFile {
    pub fn scenario(&self) -> hybridlab_core::Result<MacScenario> {
        match &self.channel {
            None => MacScenario::noiseless(self.sources.clone(), self.input_sizes, self.distortions.clone()),
            Some(ch) => {
                let s = MacScenario {
                    sources: self.sources.clone(),
                    input_sizes: self.input_sizes,
                    channel: ch.clone(),
                    distortions: self.distortions.clone(),
                };
                s.validate()?;
                Ok(s)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwrcFile {
    pub version: u32,
    #[serde(default)]
    pub description: String,
    pub channel: TwrcChannel,
    pub spec: TwrcSpec,
}

/// Relay on the segment between the terminals, at distance `r` from node 1.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub r: f64,
    pub power: f64,
    pub path_loss_exp: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GaussChannel {
    /// `[S13, S23, S31, S32]`.
    Snr([f64; 4]),
    /// Amplitude gains `[g13, g23, g31, g32]` and power.
    Gains { gains: [f64; 4], power: f64 },
    Position(Position),
}

impl GaussChannel {
    pub fn params(&self) -> hybridlab_core::Result<GaussianTwrcParams> {
        match self {
            GaussChannel::Snr(s) => GaussianTwrcParams::new(s[0], s[1], s[2], s[3]),
            GaussChannel::Gains { gains, power } => GaussianTwrcParams::from_gains(*gains, *power),
            GaussChannel::Position(p) => {
                if !(p.r > 0.0 && p.r < 1.0) {
                    return Err(hybridlab_core::Error::InvalidParameter(format!(
                        "relay position r = {} is outside (0, 1)",
                        p.r
                    )));
                }
                let g1 = p.r.powf(-p.path_loss_exp / 2.0);
                let g2 = (1.0 - p.r).powf(-p.path_loss_exp / 2.0);
                GaussianTwrcParams::from_gains([g1, g2, g1, g2], p.power)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_power")]
    pub power: f64,
    #[serde(default = "default_path_loss")]
    pub path_loss_exp: f64,
    #[serde(default = "default_r_grid")]
    pub r_grid: Vec<f64>,
}

fn default_power() -> f64 {
    10.0
}

fn default_path_loss() -> f64 {
    3.0
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            power: default_power(),
            path_loss_exp: default_path_loss(),
            r_grid: default_r_grid(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussFile {
    pub version: u32,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub channel: Option<GaussChannel>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub optimizer: GaussOptConfig,
}

/// Deterministic diamond from symbol maps.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterministicDiamond {
    /// `(y2, y3)` for each `x1`.
    pub broadcast: Vec<(usize, usize)>,
    pub relay_output_sizes: [usize; 2],
    /// `y4[x2][x3]`.
    pub mac: Vec<Vec<usize>>,
    pub output_size: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DiamondChannelFile {
    Deterministic(DeterministicDiamond),
    Kernels(DiamondChannel),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiamondFile {
    pub version: u32,
    #[serde(default)]
    pub description: String,
    pub channel: DiamondChannelFile,
    #[serde(default)]
    pub search: DetSearchConfig,
    /// Optional relay code evaluated with the general diamond bound.
    #[serde(default)]
    pub spec: Option<DiamondSpec>,
}

impl DiamondFile {
    pub fn channel(&self) -> hybridlab_core::Result<DiamondChannel> {
        match &self.channel {
            DiamondChannelFile::Deterministic(d) => {
                DiamondChannel::deterministic(&d.broadcast, d.relay_output_sizes, &d.mac, d.output_size)
            }
            DiamondChannelFile::Kernels(k) => {
                k.validate()?;
                Ok(k.clone())
            }
        }
    }
}

pub fn parse(text: &str, path: &str) -> Result<Scenario> {
    let schema = |message: String| CliError::Schema {
        path: path.to_string(),
        message,
    };
    let scn: Scenario = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    if scn.version() != SCHEMA_VERSION {
        return Err(schema(format!(
            "version {} is not supported (expected {SCHEMA_VERSION})",
            scn.version()
        )));
    }
    Ok(scn)
}

/// Reads a scenario and returns it with its raw bytes (for the manifest digest).
pub fn load(path: &Path) -> Result<(Scenario, Vec<u8>)> {
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| CliError::Read {
        path: shown.clone(),
        source,
    })?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Schema {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    Ok((parse(&text, &shown)?, bytes))
}
