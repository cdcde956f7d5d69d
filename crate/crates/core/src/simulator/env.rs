use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::policy::{softmax, PolicyParams};

/// Token that opens every `Branch` block.
pub const ALT_TOKEN: u32 = 0;
/// Token used by a `Repeat` with nothing to copy.
pub const FILLER_TOKEN: u32 = 1;
const FIRST_FRESH_TOKEN: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Work,
    Branch,
    Repeat,
    Answer,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Work, Action::Branch, Action::Repeat, Action::Answer];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }
}

/// What the policy sees: difficulty, clipped progress and clipped step index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub difficulty: u32,
    pub progress: u32,
    pub step: u32,
}

impl Observation {
    pub const MAX_PROGRESS: u32 = 15;
    pub const MAX_STEP: u32 = 63;
    pub const NUM_STATES: usize = 8 * 16 * 64;

    pub fn new(difficulty: u32, progress: u32, step: u32) -> Self {
        Self {
            difficulty,
            progress: progress.min(Self::MAX_PROGRESS),
            step: step.min(Self::MAX_STEP),
        }
    }

    /// Row of this observation in the policy tables.
    pub fn index(&self) -> usize {
        let d = (self.difficulty.clamp(1, 8) - 1) as usize;
        (d * 16 + self.progress as usize) * 64 + self.step as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub observation: Observation,
    pub action: Action,
    /// Tokens emitted by this step; empty when the block did not fit.
    pub tokens: Vec<u32>,
    /// Log-probability of `action` under the behaviour policy.
    pub log_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    Wrong,
    /// The cap was reached before an answer.
    Exceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub difficulty: u32,
    pub steps: Vec<Step>,
    pub outcome: Outcome,
    /// Total generated tokens.
    pub length: u64,
}

impl EpisodeTrace {
    pub fn tokens(&self) -> Vec<u32> {
        self.steps.iter().flat_map(|s| s.tokens.iter().copied()).collect()
    }

    pub fn count(&self, action: Action) -> usize {
        self.steps.iter().filter(|s| s.action == action).count()
    }
}

/// Probability that an answer given at progress `p` on difficulty `d` is correct.
pub fn correct_probability(progress: u32, difficulty: u32, steepness: f64) -> f64 {
    1.0 / (1.0 + (-steepness * (f64::from(progress) - f64::from(difficulty))).exp())
}

fn sample_action<R: Rng + ?Sized>(probs: &[f64; 4], rng: &mut R) -> Action {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return Action::from_index(i);
        }
    }
    // Rounding left u above the cumulative sum; take the last action with mass.
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(3);
    Action::from_index(last)
}

/// Plays one episode with `policy`.
pub fn rollout<R: Rng + ?Sized>(policy: &PolicyParams, cfg: &SimConfig, rng: &mut R) -> EpisodeTrace {
    let difficulty = rng.gen_range(cfg.min_difficulty..=cfg.max_difficulty);
    let mut viable = !rng.gen_bool(cfg.dead_start_prob);
    let mut progress: u32 = 0;
    let mut length: u64 = 0;
    let mut next_token = FIRST_FRESH_TOKEN;
    let mut fresh = |n: u64, out: &mut Vec<u32>| {
        for _ in 0..n {
            out.push(next_token);
            next_token += 1;
        }
    };
    let mut steps: Vec<Step> = Vec::new();
    let min_block = cfg.min_block();

    loop {
        if length + min_block > cfg.max_length {
            return EpisodeTrace {
                difficulty,
                steps,
                outcome: Outcome::Exceeded,
                length,
            };
        }
        let observation = Observation::new(difficulty, progress, steps.len() as u32);
        let state = observation.index();
        let probs = softmax(policy.state_logits(state));
        let action = sample_action(&probs, rng);
        let log_prob = policy.log_prob(state, action);
        let block = match action {
            Action::Work => cfg.work_block,
            Action::Branch => cfg.branch_block,
            Action::Repeat => cfg.repeat_block,
            Action::Answer => cfg.answer_block,
        };
        if length + block > cfg.max_length {
            steps.push(Step {
                observation,
                action,
                tokens: Vec::new(),
                log_prob,
            });
            return EpisodeTrace {
                difficulty,
                steps,
                outcome: Outcome::Exceeded,
                length,
            };
        }
        let mut tokens = Vec::with_capacity(block as usize);
        match action {
            Action::Work => {
                fresh(block, &mut tokens);
                if viable && rng.gen_bool(cfg.work_progress_prob) {
                    progress += 1;
                }
            }
            Action::Branch => {
                tokens.push(ALT_TOKEN);
                fresh(block - 1, &mut tokens);
                viable = rng.gen_bool(cfg.branch_revive_prob);
            }
            Action::Repeat => {
                let previous = steps.iter().rev().find(|s| !s.tokens.is_empty());
                match previous {
                    Some(prev) => tokens.extend(prev.tokens.iter().cycle().take(block as usize)),
                    None => tokens.resize(block as usize, FILLER_TOKEN),
                }
            }
            Action::Answer => fresh(block, &mut tokens),
        }
        length += block;
        steps.push(Step {
            observation,
            action,
            tokens,
            log_prob,
        });
        if action == Action::Answer {
            let p = correct_probability(progress, difficulty, cfg.steepness);
            let outcome = if rng.gen_bool(p) { Outcome::Correct } else { Outcome::Wrong };
            return EpisodeTrace {
                difficulty,
                steps,
                outcome,
                length,
            };
        }
    }
}
