//! Experiment configuration. Parsing is strict: unknown keys are errors.
//!
//! ```json
//! {
//!   "waveguide": { "depth": 20, "n1": 2, "modes": 10 },
//!   "medium": { "kernel": { "kind": "stationary_exponential", "sigma2": 1, "corr_length": 4 }, "a": 1 },
//!   "mirror": { "center": 10, "d_tilde_1": 5, "d_tilde_2": 5, "alpha_m": 0 },
//!   "run": { "seed": 7, "power": { "z_max": 100 } }
//! }
//! ```

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::diffusion::DiffusionConfig;
use crate::error::{Error, Result};
use crate::medium::{LossVariant, MediumStats};
use crate::montecarlo::MCConfig;
use crate::refocus::{MirrorSpec, Normalization};
use crate::waveguide::WaveguideConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveguide: Option<WaveguideBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium: Option<MediumStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror: Option<MirrorSpec>,
    #[serde(default)]
    pub run: RunBlock,
}

/// Either `omega` or `modes` fixes the frequency; `modes` picks
/// `omega` so that `n1 k d theta = (modes + mode_fraction) pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideBlock {
    pub depth: f64,
    pub n1: f64,
    #[serde(default = "one")]
    pub c_bar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default = "half")]
    pub mode_fraction: f64,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

impl WaveguideBlock {
    pub fn resolve(&self) -> Result<WaveguideConfig> {
        match (self.omega, self.modes) {
            (Some(w), None) => WaveguideConfig::new(self.depth, self.n1, self.c_bar, w),
            (None, Some(n)) => {
                if !(0.0..1.0).contains(&self.mode_fraction) {
                    return Err(Error::InvalidConfig(format!(
                        "mode_fraction must lie in [0, 1), got {}",
                        self.mode_fraction
                    )));
                }
                WaveguideConfig::with_mode_parameter(self.depth, self.n1, self.c_bar, n, self.mode_fraction)
            }
            _ => Err(Error::InvalidConfig("waveguide needs exactly one of omega and modes".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerRun>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<DiffusionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileRun>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<MonteCarloRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerRun {
    pub z_max: f64,
    #[serde(default = "fifty")]
    pub checkpoints: usize,
    /// Apply the nearest-neighbor idealization before integrating.
    #[serde(default)]
    pub nearest_neighbor: bool,
    #[serde(default)]
    pub loss_variant: LossVariant,
    /// Coupling scalings `tau` for the strong/weak sweep; empty skips it.
    #[serde(default)]
    pub tau_sweep: Vec<f64>,
    /// Jump-process paths for the Feynman-Kac cross-check at `z_max`.
    #[serde(default)]
    pub mc_paths: usize,
    #[serde(default = "first")]
    pub mode_in: usize,
}

fn fifty() -> usize {
    50
}

fn first() -> usize {
    1
}

/// Where the transport matrix for a profile comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSource {
    /// Assembled from the `medium` block.
    #[default]
    Medium,
    /// The nearest-neighbor chain matched to `run.diffusion`.
    Diffusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileRun {
    pub distances: Vec<f64>,
    /// Source depth; the middle of the layer when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default = "three")]
    pub x_half_width: f64,
    #[serde(default = "points")]
    pub x_points: usize,
    #[serde(default)]
    pub lossless: bool,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub source: CouplingSource,
}

fn three() -> f64 {
    3.0
}

fn points() -> usize {
    601
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloRun {
    pub epsilon: f64,
    pub realizations: usize,
    pub distance: f64,
    #[serde(default)]
    pub bins: usize,
    #[serde(default = "first")]
    pub mode_in: usize,
    #[serde(default = "yes")]
    pub nearest_neighbor: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_step: Option<f64>,
    #[serde(default = "terms")]
    pub mercer_terms: usize,
}

fn yes() -> bool {
    true
}

fn terms() -> usize {
    24
}

impl MonteCarloRun {
    pub fn to_mc(&self, seed: u64) -> MCConfig {
        MCConfig {
            epsilon: self.epsilon,
            realizations: self.realizations,
            radiation_bins: self.bins,
            seed,
            distance: self.distance,
            z_step: self.z_step,
            nearest_neighbor: self.nearest_neighbor,
            mercer_terms: self.mercer_terms,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn waveguide(&self) -> Result<WaveguideConfig> {
        self.waveguide.as_ref().ok_or_else(|| missing("waveguide"))?.resolve()
    }

    pub fn medium(&self) -> Result<&MediumStats> {
        self.medium.as_ref().ok_or_else(|| missing("medium"))
    }

    pub fn mirror(&self) -> Result<&MirrorSpec> {
        self.mirror.as_ref().ok_or_else(|| missing("mirror"))
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(0)
    }
}

pub fn missing(block: &str) -> Error {
    Error::InvalidConfig(format!("missing `{block}` block"))
}
