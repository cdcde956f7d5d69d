use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reward::{self, RewardConfig, RewardError};

/// Names accepted by [`SimConfig::preset`].
pub const SIM_PRESETS: [&str; 7] = [
    "classic",
    "cosine-default",
    "cosine-a",
    "cosine-b",
    "cosine-c",
    "cosine-rep-on",
    "cosine-rep-off",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{0} must be a probability in [0, 1]")]
    Probability(&'static str),
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error("max_length ({max}) is smaller than the answer block ({answer})")]
    CapTooSmall { max: u64, answer: u64 },
    #[error("difficulty range [{min}, {max}] is empty or outside 1..=8")]
    Difficulty { min: u32, max: u32 },
    #[error("{0} must be finite and non-negative")]
    Coefficient(&'static str),
    #[error("discount {0} is outside [0, 1]")]
    Gamma(&'static str),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error("unknown simulator preset `{0}`")]
    UnknownPreset(String),
}

/// Which terminal reward drives training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardSpec {
    Classic,
    ThreeWay,
    /// Named cosine preset; `max_length` comes from the simulator config.
    Cosine { preset: String },
}

impl RewardSpec {
    pub fn cosine(preset: &str) -> Self {
        RewardSpec::Cosine {
            preset: preset.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Token cap for one episode.
    pub max_length: u64,
    pub work_block: u64,
    pub branch_block: u64,
    pub repeat_block: u64,
    pub answer_block: u64,
    pub min_difficulty: u32,
    pub max_difficulty: u32,
    /// Probability that the initial approach is a dead end.
    pub dead_start_prob: f64,
    /// Probability that a new branch is viable.
    pub branch_revive_prob: f64,
    /// Probability that a `Work` step on a viable approach makes progress.
    pub work_progress_prob: f64,
    /// Slope of the logistic answer-correctness curve.
    pub steepness: f64,
    /// Logits of the initial policy for `[Work, Branch, Repeat, Answer]`,
    /// shared by every state. They also define the KL reference. The default
    /// stops rarely, so untrained episodes are already long and some overrun
    /// the cap.
    pub initial_logits: [f64; 4],
    pub reward: RewardSpec,
    pub repetition_penalty: bool,
    pub repetition_ngram: usize,
    pub repetition_value: f64,
    pub gamma_correct: f64,
    pub gamma_penalty: f64,
    pub clip: f64,
    pub entropy_coef: f64,
    pub kl_coef: f64,
    pub actor_step: f64,
    pub critic_step: f64,
    /// Optimisation passes over each batch.
    pub update_epochs: usize,
    /// Standardise advantages across the batch before the update.
    pub whiten_advantages: bool,
    pub episodes_per_iter: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            max_length: 512,
            work_block: 8,
            branch_block: 8,
            repeat_block: 8,
            answer_block: 4,
            min_difficulty: 1,
            max_difficulty: 8,
            dead_start_prob: 0.3,
            branch_revive_prob: 0.7,
            work_progress_prob: 0.9,
            steepness: 1.0,
            initial_logits: [0.0, 0.0, 0.0, -2.0],
            reward: RewardSpec::cosine("default"),
            repetition_penalty: false,
            repetition_ngram: 4,
            repetition_value: -0.05,
            gamma_correct: 1.0,
            gamma_penalty: 0.99,
            clip: 0.2,
            entropy_coef: 0.01,
            kl_coef: 0.01,
            actor_step: 0.05,
            critic_step: 0.1,
            update_epochs: 1,
            whiten_advantages: false,
            episodes_per_iter: 256,
            iterations: 300,
            seed: 0,
        }
    }
}

fn probability(name: &'static str, p: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ConfigError::Probability(name))
    }
}

fn coefficient(name: &'static str, c: f64) -> Result<(), ConfigError> {
    if c.is_finite() && c >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Coefficient(name))
    }
}

impl SimConfig {
    /// Built-in experiment presets.
    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let base = Self::default();
        let cfg = match name {
            "classic" => Self {
                reward: RewardSpec::Classic,
                ..base
            },
            "cosine-default" | "cosine-rep-off" => base,
            "cosine-a" => Self {
                reward: RewardSpec::cosine("reward_a"),
                ..base
            },
            "cosine-b" => Self {
                reward: RewardSpec::cosine("reward_b"),
                ..base
            },
            "cosine-c" => Self {
                reward: RewardSpec::cosine("reward_c"),
                ..base
            },
            "cosine-rep-on" => Self {
                repetition_penalty: true,
                ..base
            },
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        };
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        probability("dead_start_prob", self.dead_start_prob)?;
        probability("branch_revive_prob", self.branch_revive_prob)?;
        probability("work_progress_prob", self.work_progress_prob)?;
        for (name, v) in [
            ("work_block", self.work_block),
            ("branch_block", self.branch_block),
            ("repeat_block", self.repeat_block),
            ("answer_block", self.answer_block),
        ] {
            if v == 0 {
                return Err(ConfigError::Zero(name));
            }
        }
        if self.repetition_ngram == 0 {
            return Err(ConfigError::Zero("repetition_ngram"));
        }
        if self.episodes_per_iter == 0 {
            return Err(ConfigError::Zero("episodes_per_iter"));
        }
        if self.update_epochs == 0 {
            return Err(ConfigError::Zero("update_epochs"));
        }
        if self.max_length < self.answer_block {
            return Err(ConfigError::CapTooSmall {
                max: self.max_length,
                answer: self.answer_block,
            });
        }
        if self.min_difficulty == 0 || self.min_difficulty > self.max_difficulty || self.max_difficulty > 8 {
            return Err(ConfigError::Difficulty {
                min: self.min_difficulty,
                max: self.max_difficulty,
            });
        }
        for (name, c) in [
            ("steepness", self.steepness),
            ("clip", self.clip),
            ("entropy_coef", self.entropy_coef),
            ("kl_coef", self.kl_coef),
            ("actor_step", self.actor_step),
            ("critic_step", self.critic_step),
        ] {
            coefficient(name, c)?;
        }
        if self.initial_logits.iter().any(|l| !l.is_finite()) {
            return Err(ConfigError::Coefficient("initial_logits"));
        }
        if !self.repetition_value.is_finite() {
            return Err(ConfigError::Coefficient("repetition_value"));
        }
        for (name, g) in [("gamma_correct", self.gamma_correct), ("gamma_penalty", self.gamma_penalty)] {
            if !(0.0..=1.0).contains(&g) {
                return Err(ConfigError::Gamma(name));
            }
        }
        self.cosine_config()?;
        Ok(())
    }

    /// The cosine reward parameters, when the reward is a cosine preset.
    pub fn cosine_config(&self) -> Result<Option<RewardConfig>, ConfigError> {
        match &self.reward {
            RewardSpec::Cosine { preset } => Ok(Some(reward::preset(preset, Some(self.max_length))?)),
            _ => Ok(None),
        }
    }

    pub fn min_block(&self) -> u64 {
        self.work_block
            .min(self.branch_block)
            .min(self.repeat_block)
            .min(self.answer_block)
    }
}
