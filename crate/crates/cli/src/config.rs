//! Run configuration: command-line flags layered over an optional JSON file,
//! then `DDFORGE_SEED`, then built-in defaults.

use std::path::{Path, PathBuf};

use ddforge::analysis::Functional;
use ddforge::bath::{ModelSpec, NormTargets, Preset};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SEED_ENV: &str = "DDFORGE_SEED";

/// Every field a command may read. A run is fully described by the resolved
/// config, which is echoed into CSV metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<Functional>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_meta: Option<bool>,
}

macro_rules! overlay {
    ($top:expr, $bottom:expr, $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($bottom.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Fields set in `self` win; unset ones fall back to `lower`.
    pub fn over(self, lower: RunConfig) -> RunConfig {
        overlay!(
            self, lower, family, t, n, m, c, level, axis, base, d, seed, preset, norm_0, norm_x, norm_y, norm_z,
            at_min, at_max, points, functional, at, tau0, m_max, n_max, families, out, summary, jobs, no_meta
        )
    }

    /// Fills the seed from the environment when neither flags nor the file set it.
    pub fn with_env_seed(mut self) -> Result<Self, CliError> {
        if self.seed.is_none() {
            if let Ok(v) = std::env::var(SEED_ENV) {
                let seed = v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
                self.seed = Some(seed);
            }
        }
        Ok(self)
    }

    pub fn model_spec(&self, default_preset: Preset) -> ModelSpec {
        let preset = self.preset.unwrap_or(default_preset);
        let targets = NormTargets {
            a0: self.norm_0.unwrap_or(1.0),
            x: self.norm_x.unwrap_or(1.0),
            y: self.norm_y.unwrap_or(1.0),
            z: self.norm_z.unwrap_or(1.0),
        };
        ModelSpec::new(self.d.unwrap_or(4), self.seed.unwrap_or(0), preset).with_targets(targets)
    }

    pub fn no_meta(&self) -> bool {
        self.no_meta.unwrap_or(false)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
