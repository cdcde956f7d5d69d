//! Scalar terminal rewards.
//!
//! All rewards here are outcome rewards: they are computed once per generation
//! from its correctness and (for the cosine family) its generated length.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Generation cap used by the named presets when the caller does not supply one.
pub const DEFAULT_MAX_LENGTH: u64 = 14336;

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 4] = ["default", "reward_a", "reward_b", "reward_c"];

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("interpolation step {t} is outside [0, {horizon}]")]
    StepOutOfRange { t: u64, horizon: u64 },
    #[error("interpolation horizon must be positive")]
    ZeroHorizon,
    #[error("max_length must be at least 1")]
    ZeroMaxLength,
    #[error("reward value `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("unknown reward preset `{0}` (expected one of default, reward_a, reward_b, reward_c)")]
    UnknownPreset(String),
}

/// Outcome of grading a single response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectnessLabel {
    Correct,
    Wrong,
    NoAnswer,
}

impl CorrectnessLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CorrectnessLabel::Correct => "correct",
            CorrectnessLabel::Wrong => "wrong",
            CorrectnessLabel::NoAnswer => "no_answer",
        }
    }

    pub fn is_correct(self) -> bool {
        self == CorrectnessLabel::Correct
    }
}

impl fmt::Display for CorrectnessLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hyperparameters of the length-shaped cosine reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig {
    /// Reward for a correct answer at generation length 0.
    pub r0_correct: f64,
    /// Reward for a correct answer at `max_length`.
    pub rl_correct: f64,
    /// Reward for a wrong answer at generation length 0.
    pub r0_wrong: f64,
    /// Reward for a wrong answer at `max_length`.
    pub rl_wrong: f64,
    /// Reward when the generation reaches the cap.
    pub exceed_penalty: f64,
    /// Generation cap in tokens (prompt excluded).
    pub max_length: u64,
}

impl RewardConfig {
    pub fn new(
        r0_correct: f64,
        rl_correct: f64,
        r0_wrong: f64,
        rl_wrong: f64,
        exceed_penalty: f64,
        max_length: u64,
    ) -> Result<Self, RewardError> {
        let cfg = Self {
            r0_correct,
            rl_correct,
            r0_wrong,
            rl_wrong,
            exceed_penalty,
            max_length,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Checks the structural invariants (finite rewards, positive cap).
    pub fn check(&self) -> Result<(), RewardError> {
        if self.max_length == 0 {
            return Err(RewardError::ZeroMaxLength);
        }
        let fields = [
            ("r0_correct", self.r0_correct),
            ("rl_correct", self.rl_correct),
            ("r0_wrong", self.r0_wrong),
            ("rl_wrong", self.rl_wrong),
            ("exceed_penalty", self.exceed_penalty),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(RewardError::NonFinite(name));
            }
        }
        Ok(())
    }

    pub fn with_max_length(mut self, max_length: u64) -> Result<Self, RewardError> {
        self.max_length = max_length;
        self.check()?;
        Ok(self)
    }

    fn endpoints(&self, correct: bool) -> (f64, f64) {
        if correct {
            (self.r0_correct, self.rl_correct)
        } else {
            (self.r0_wrong, self.rl_wrong)
        }
    }
}

impl Default for RewardConfig {
    fn default() -> Self {
        preset("default", None).expect("default preset exists")
    }
}

/// Cosine interpolation from `start_value` at `t = 0` to `end_value` at `t = horizon`.
///
/// This is the cosine-annealing schedule written with fixed endpoint
/// semantics: `end + (start - end) * (1 + cos(t * pi / horizon)) / 2`.
pub fn cos_interp(t: u64, horizon: u64, start_value: f64, end_value: f64) -> Result<f64, RewardError> {
    if horizon == 0 {
        return Err(RewardError::ZeroHorizon);
    }
    if t > horizon {
        return Err(RewardError::StepOutOfRange { t, horizon });
    }
    let phase = (t as f64 / horizon as f64) * PI;
    Ok(end_value + 0.5 * (start_value - end_value) * (1.0 + phase.cos()))
}

/// Length-shaped cosine reward.
///
/// Generations at or beyond `cfg.max_length` receive `cfg.exceed_penalty`
/// regardless of correctness.
pub fn cosine_reward(correct: bool, gen_length: u64, cfg: &RewardConfig) -> f64 {
    if gen_length >= cfg.max_length {
        return cfg.exceed_penalty;
    }
    let (start, end) = cfg.endpoints(correct);
    // gen_length < max_length and max_length >= 1, so this cannot fail.
    cos_interp(gen_length, cfg.max_length, start, end).unwrap_or(cfg.exceed_penalty)
}

/// 1 for a correct answer, 0 otherwise.
pub fn classic_reward(correct: bool) -> f64 {
    if correct {
        1.0
    } else {
        0.0
    }
}

/// Reward used when training directly from a base model.
pub fn three_way_reward(label: CorrectnessLabel) -> f64 {
    match label {
        CorrectnessLabel::Correct => 1.0,
        CorrectnessLabel::Wrong => -0.5,
        CorrectnessLabel::NoAnswer => -1.0,
    }
}

/// Looks up a named cosine-reward preset.
pub fn preset(name: &str, max_length: Option<u64>) -> Result<RewardConfig, RewardError> {
    let (r0c, rlc, r0w, rlw, re) = match name {
        "default" => (2.0, 1.0, -10.0, 0.0, -10.0),
        "reward_a" => (0.0, 10.0, 0.0, 0.0, -10.0),
        "reward_b" => (6.0, 5.0, -10.0, 0.0, -10.0),
        "reward_c" => (10.0, 9.0, -10.0, 0.0, -10.0),
        other => return Err(RewardError::UnknownPreset(other.to_string())),
    };
    RewardConfig::new(r0c, rlc, r0w, rlw, re, max_length.unwrap_or(DEFAULT_MAX_LENGTH))
}

/// A violated length-ordering constraint. Violations are reported, never rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingWarning {
    /// Some correct reward is not strictly above every wrong reward.
    CorrectNotAboveWrong,
    /// `r0_correct <= rl_correct`: longer correct answers are not penalised.
    ShortCorrectNotPreferred,
    /// `r0_wrong > rl_wrong`: shorter wrong answers are penalised less.
    ShortWrongNotPenalized,
}

impl fmt::Display for OrderingWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            OrderingWarning::CorrectNotAboveWrong => {
                "correct rewards do not strictly dominate wrong rewards at every length"
            }
            OrderingWarning::ShortCorrectNotPreferred => {
                "r0_correct <= rl_correct: shorter correct answers are not preferred"
            }
            OrderingWarning::ShortWrongNotPenalized => {
                "r0_wrong > rl_wrong: shorter wrong answers are penalised less"
            }
        };
        f.write_str(msg)
    }
}

/// Reports every ordering constraint that `cfg` violates.
///
/// Dominance of correct over wrong is checked at every length a generated
/// answer can have, `1..max_length`. The gap between the two branches is
/// monotone in the cosine term, so the two extreme lengths decide it. A wrong
/// branch that is flat in length is not reported as an inversion.
pub fn validate_config(cfg: &RewardConfig) -> Vec<OrderingWarning> {
    let mut warnings = Vec::new();
    let last = cfg.max_length.saturating_sub(1);
    let dominated = [last.min(1), last]
        .iter()
        .any(|&l| cosine_reward(true, l, cfg) <= cosine_reward(false, l, cfg));
    if dominated {
        warnings.push(OrderingWarning::CorrectNotAboveWrong);
    }
    if cfg.r0_correct <= cfg.rl_correct {
        warnings.push(OrderingWarning::ShortCorrectNotPreferred);
    }
    if cfg.r0_wrong > cfg.rl_wrong {
        warnings.push(OrderingWarning::ShortWrongNotPenalized);
    }
    warnings
}
