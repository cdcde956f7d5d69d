use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{DedupConfig, MineConfig};
use crate::repetition::{DEFAULT_NGRAM, DEFAULT_PENALTY};
use crate::reward::{self, RewardConfig, RewardError};
use crate::simulator::{gamma_sweep, ConfigError, SimConfig};

/// Simulator presets accepted by [`sim_preset`], including the sweep.
pub const SIM_PRESET_NAMES: [&str; 8] = [
    "classic",
    "cosine-default",
    "cosine-a",
    "cosine-b",
    "cosine-c",
    "cosine-rep-on",
    "cosine-rep-off",
    "gamma-sweep",
];

/// Configurations for a named simulator preset; `gamma-sweep` expands to one
/// `cosine-rep-on` config per swept discount.
pub fn sim_preset(name: &str) -> Result<Vec<SimConfig>, ConfigError> {
    if name == "gamma-sweep" {
        return Ok(gamma_sweep(&SimConfig::preset("cosine-rep-on")?));
    }
    Ok(vec![SimConfig::preset(name)?])
}

#[derive(Debug, Error)]
pub enum ConfigLoadError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Simulator(#[from] ConfigError),
    #[error("{0}")]
    Invalid(String),
}

/// Individual overrides applied on top of the reward preset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardOverrides {
    pub r0_correct: Option<f64>,
    pub rl_correct: Option<f64>,
    pub r0_wrong: Option<f64>,
    pub rl_wrong: Option<f64>,
    pub exceed_penalty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardSection {
    /// One of `default`, `reward_a`, `reward_b`, `reward_c`.
    pub preset: String,
    /// Generation cap; the preset default applies when absent.
    pub max_length: Option<u64>,
    pub overrides: RewardOverrides,
}

impl Default for RewardSection {
    fn default() -> Self {
        Self {
            preset: "default".to_string(),
            max_length: None,
            overrides: RewardOverrides::default(),
        }
    }
}

impl RewardSection {
    pub fn resolve(&self) -> Result<RewardConfig, RewardError> {
        let base = reward::preset(&self.preset, self.max_length)?;
        let o = &self.overrides;
        RewardConfig::new(
            o.r0_correct.unwrap_or(base.r0_correct),
            o.rl_correct.unwrap_or(base.rl_correct),
            o.r0_wrong.unwrap_or(base.r0_wrong),
            o.rl_wrong.unwrap_or(base.rl_wrong),
            o.exceed_penalty.unwrap_or(base.exceed_penalty),
            base.max_length,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RepetitionSection {
    pub ngram: usize,
    pub penalty: f64,
}

impl Default for RepetitionSection {
    fn default() -> Self {
        Self {
            ngram: DEFAULT_NGRAM,
            penalty: DEFAULT_PENALTY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdvantageSection {
    pub gamma_correct: f64,
    pub gamma_penalty: f64,
    pub lambda: f64,
}

impl Default for AdvantageSection {
    fn default() -> Self {
        Self {
            gamma_correct: 1.0,
            gamma_penalty: 0.99,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSection {
    pub dedup: DedupConfig,
    pub mine: MineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EndpointSection {
    /// Completion endpoint; `COTFORGE_LLM_ENDPOINT` is used when absent.
    pub url: Option<String>,
    /// Separate endpoint for the reflection action.
    pub reflection_url: Option<String>,
    pub timeout_secs: u64,
    pub retries: u32,
}

impl Default for EndpointSection {
    fn default() -> Self {
        Self {
            url: None,
            reflection_url: None,
            timeout_secs: 60,
            retries: 2,
        }
    }
}

impl EndpointSection {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

/// Everything a `--config` file may set. Unknown keys are rejected and every
/// field has a default, so `{}` is a valid config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlobalConfig {
    pub reward: RewardSection,
    pub repetition: RepetitionSection,
    pub advantage: AdvantageSection,
    pub corpus: CorpusSection,
    pub simulator: SimConfig,
    pub endpoint: EndpointSection,
    /// When present, replaces the seeds of `corpus.dedup`, `corpus.mine` and
    /// `simulator`.
    pub seed: Option<u64>,
}

impl GlobalConfig {
    pub fn from_json(text: &str, path: &str) -> Result<Self, ConfigLoadError> {
        let cfg: Self = serde_json::from_str(text).map_err(|source| ConfigLoadError::Parse {
            path: path.to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg.with_master_seed())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigLoadError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigLoadError::Read {
            path: display.clone(),
            source,
        })?;
        Self::from_json(&text, &display)
    }

    fn with_master_seed(mut self) -> Self {
        if let Some(seed) = self.seed {
            self.corpus.dedup.seed = seed;
            self.corpus.mine.seed = seed;
            self.simulator.seed = seed;
        }
        self
    }

    pub fn validate(&self) -> Result<(), ConfigLoadError> {
        self.reward.resolve()?;
        if self.repetition.ngram == 0 {
            return Err(ConfigLoadError::Invalid("repetition.ngram must be at least 1".into()));
        }
        if !self.repetition.penalty.is_finite() {
            return Err(ConfigLoadError::Invalid("repetition.penalty must be finite".into()));
        }
        let a = &self.advantage;
        for (name, g) in [("gamma_correct", a.gamma_correct), ("gamma_penalty", a.gamma_penalty)] {
            if !(0.0..=1.0).contains(&g) {
                return Err(ConfigLoadError::Invalid(format!("advantage.{name} must lie in [0, 1]")));
            }
        }
        if !(a.lambda > 0.0 && a.lambda <= 1.0) {
            return Err(ConfigLoadError::Invalid("advantage.lambda must lie in (0, 1]".into()));
        }
        self.corpus
            .dedup
            .check()
            .map_err(|e| ConfigLoadError::Invalid(format!("corpus.dedup: {e}")))?;
        self.simulator.validate()?;
        Ok(())
    }
}
