use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ConfigError, SimConfig};
use super::env::{rollout, Action, EpisodeTrace, Outcome};
use super::policy::PolicyParams;
use super::ppo::{ppo_update, UpdateStats};
use super::rewards::assign_rewards;
use crate::advantage::{multi_channel_advantage, AdvantageTrace, ValueTrace};
use crate::par::Executor;

/// Discounts for the correctness channel used by [`gamma_sweep`].
pub const GAMMA_SWEEP: [f64; 4] = [1.0, 0.99, 0.95, 0.9];

/// One line of the stats stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iter: usize,
    pub accuracy: f64,
    pub mean_len: f64,
    pub exceed_rate: f64,
    /// Fraction of macro-actions that were `Repeat`.
    pub repeat_freq: f64,
    /// Fraction of macro-actions that were `Branch`.
    pub branch_freq: f64,
    /// Visit-weighted mean of `KL(current || initial)`.
    pub kl: f64,
    pub p50_len: f64,
    pub p90_len: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one episode, independent of how rollouts are scheduled.
pub fn episode_seed(seed: u64, iter: usize, episode: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ iter as u64) ^ episode as u64)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn summarize(iter: usize, traces: &[EpisodeTrace], policy: &PolicyParams) -> IterationStats {
    let n = traces.len() as f64;
    let mut lengths: Vec<f64> = traces.iter().map(|t| t.length as f64).collect();
    lengths.sort_by(f64::total_cmp);
    let steps: usize = traces.iter().map(|t| t.steps.len()).sum();
    let per_step = |action| {
        if steps == 0 {
            0.0
        } else {
            traces.iter().map(|t| t.count(action)).sum::<usize>() as f64 / steps as f64
        }
    };
    let kl_total: f64 = traces
        .iter()
        .flat_map(|t| &t.steps)
        .map(|s| policy.kl_to_reference(s.observation.index()))
        .sum();
    IterationStats {
        iter,
        accuracy: traces.iter().filter(|t| t.outcome == Outcome::Correct).count() as f64 / n,
        mean_len: lengths.iter().sum::<f64>() / n,
        exceed_rate: traces.iter().filter(|t| t.outcome == Outcome::Exceeded).count() as f64 / n,
        repeat_freq: per_step(Action::Repeat),
        branch_freq: per_step(Action::Branch),
        kl: if steps == 0 { 0.0 } else { kl_total / steps as f64 },
        p50_len: percentile(&lengths, 0.5),
        p90_len: percentile(&lengths, 0.9),
    }
}

/// Training loop state: the current policy and the next iteration index.
#[derive(Debug)]
pub struct Experiment {
    cfg: SimConfig,
    policy: PolicyParams,
    iter: usize,
    exec: Executor,
}

impl Experiment {
    pub fn new(cfg: SimConfig, exec: Executor) -> Result<Self, ConfigError> {
        let policy = PolicyParams::constant(cfg.initial_logits);
        Self::with_policy(cfg, policy, exec)
    }

    pub fn with_policy(cfg: SimConfig, policy: PolicyParams, exec: Executor) -> Result<Self, ConfigError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            policy,
            iter: 0,
            exec,
        })
    }

    pub fn policy(&self) -> &PolicyParams {
        &self.policy
    }

    pub fn iteration(&self) -> usize {
        self.iter
    }

    /// Rollouts for the current iteration under the current policy.
    pub fn rollouts(&self) -> Vec<EpisodeTrace> {
        let (policy, cfg, iter) = (&self.policy, &self.cfg, self.iter);
        self.exec.map_range(cfg.episodes_per_iter, |ep| {
            let mut rng = ChaCha8Rng::seed_from_u64(episode_seed(cfg.seed, iter, ep));
            rollout(policy, cfg, &mut rng)
        })
    }

    /// Samples a batch, records its statistics and, when `train` is set,
    /// applies one update.
    pub fn step(&mut self, train: bool) -> (IterationStats, Option<UpdateStats>) {
        let traces = self.rollouts();
        let stats = summarize(self.iter, &traces, &self.policy);
        let update = if train {
            let (policy, cfg) = (&self.policy, &self.cfg);
            let advantages = self.exec.map(&traces, |trace| {
                let values = ValueTrace(trace.steps.iter().map(|s| policy.value(s.observation.index())).collect());
                multi_channel_advantage(&assign_rewards(trace, cfg), &values).expect("channels match the trace length")
            });
            let batch: Vec<(EpisodeTrace, AdvantageTrace)> = traces.into_iter().zip(advantages).collect();
            let (next, update) = ppo_update(&self.policy, &batch, &self.cfg);
            self.policy = next;
            Some(update)
        } else {
            None
        };
        self.iter += 1;
        (stats, update)
    }
}

/// Runs `cfg.iterations` training iterations followed by one evaluation
/// batch, handing each iteration's stats to `sink` as it is produced.
///
/// The stream therefore has `iterations + 1` entries; entry 0 describes the
/// untrained policy.
pub fn run_experiment_with<F>(cfg: &SimConfig, exec: Executor, mut sink: F) -> Result<PolicyParams, ConfigError>
where
    F: FnMut(&IterationStats),
{
    let mut exp = Experiment::new(cfg.clone(), exec)?;
    for it in 0..=cfg.iterations {
        let (stats, update) = exp.step(it < cfg.iterations);
        if let Some(u) = update {
            tracing::debug!(iter = it, objective = u.policy_objective, kl = u.kl, "update");
        }
        sink(&stats);
    }
    Ok(exp.policy)
}

pub fn run_experiment(cfg: &SimConfig, exec: Executor) -> Result<Vec<IterationStats>, ConfigError> {
    let mut out = Vec::with_capacity(cfg.iterations + 1);
    run_experiment_with(cfg, exec, |s| out.push(s.clone()))?;
    Ok(out)
}

/// Copies of `base` differing only in the correctness-channel discount.
pub fn gamma_sweep(base: &SimConfig) -> Vec<SimConfig> {
    GAMMA_SWEEP
        .iter()
        .map(|&g| SimConfig {
            gamma_correct: g,
            ..base.clone()
        })
        .collect()
}
