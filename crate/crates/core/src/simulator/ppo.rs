//! Clipped-surrogate policy update for the tabular policy.
//!
//! Per visited state `s` the update ascends
//!
//! ```text
//! J_s = mean_i min(rho_i * A_i, clip(rho_i, 1 - eps, 1 + eps) * A_i)
//!       + entropy_coef * H(pi_s) - kl_coef * KL(pi_s || pi_ref_s)
//! ```
//!
//! with `rho_i = pi(a_i | s) / pi_old(a_i | s)`, taking one gradient step of
//! size `actor_step` per epoch. Values regress toward the empirical return
//! with step `critic_step`.

use serde::Serialize;

use super::config::SimConfig;
use super::env::{Action, EpisodeTrace};
use super::policy::{log_softmax, PolicyParams, NUM_ACTIONS};
use crate::advantage::AdvantageTrace;

/// One decision taken in a state, with its advantage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub action: Action,
    pub advantage: f64,
    pub old_log_prob: f64,
}

fn entropy_and_kl(logits: &[f64], reference: &[f64]) -> (f64, f64, [f64; NUM_ACTIONS], [f64; NUM_ACTIONS], [f64; NUM_ACTIONS]) {
    let lp = log_softmax(logits);
    let lq = log_softmax(reference);
    let mut probs = [0.0; NUM_ACTIONS];
    for (p, l) in probs.iter_mut().zip(&lp) {
        *p = l.exp();
    }
    let entropy = -probs.iter().zip(&lp).map(|(p, l)| p * l).sum::<f64>();
    let kl = probs.iter().zip(lp.iter().zip(&lq)).map(|(p, (a, b))| p * (a - b)).sum::<f64>();
    (entropy, kl, probs, lp, lq)
}

fn clipped_term(ratio: f64, advantage: f64, clip: f64) -> (f64, bool) {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip) * advantage;
    if unclipped <= clipped {
        (unclipped, true)
    } else {
        (clipped, false)
    }
}

/// Objective `J_s` for one state's logits.
pub fn surrogate_objective(logits: &[f64], reference: &[f64], samples: &[Sample], cfg: &SimConfig) -> f64 {
    let (entropy, kl, _, lp, _) = entropy_and_kl(logits, reference);
    let surrogate = if samples.is_empty() {
        0.0
    } else {
        samples
            .iter()
            .map(|s| {
                let ratio = (lp[s.action.index()] - s.old_log_prob).exp();
                clipped_term(ratio, s.advantage, cfg.clip).0
            })
            .sum::<f64>()
            / samples.len() as f64
    };
    surrogate + cfg.entropy_coef * entropy - cfg.kl_coef * kl
}

/// Analytic gradient of [`surrogate_objective`] with respect to the logits.
pub fn surrogate_gradient(logits: &[f64], reference: &[f64], samples: &[Sample], cfg: &SimConfig) -> [f64; NUM_ACTIONS] {
    let (entropy, kl, probs, lp, lq) = entropy_and_kl(logits, reference);
    let mut grad = [0.0; NUM_ACTIONS];
    if !samples.is_empty() {
        let scale = 1.0 / samples.len() as f64;
        for s in samples {
            let a = s.action.index();
            let ratio = (lp[a] - s.old_log_prob).exp();
            let (_, active) = clipped_term(ratio, s.advantage, cfg.clip);
            if !active {
                continue;
            }
            for (b, g) in grad.iter_mut().enumerate() {
                let indicator = if a == b { 1.0 } else { 0.0 };
                *g += scale * s.advantage * ratio * (indicator - probs[b]);
            }
        }
    }
    for b in 0..NUM_ACTIONS {
        let d_entropy = -probs[b] * (lp[b] + entropy);
        let d_kl = probs[b] * (lp[b] - lq[b] - kl);
        grad[b] += cfg.entropy_coef * d_entropy - cfg.kl_coef * d_kl;
    }
    grad
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct UpdateStats {
    /// Mean clipped surrogate over all samples, before the update.
    pub policy_objective: f64,
    /// Mean policy entropy over visited states, before the update.
    pub entropy: f64,
    /// Mean `KL(pi || pi_ref)` over visited states, before the update.
    pub kl: f64,
    /// Mean squared error of the value table against the returns, before the update.
    pub value_loss: f64,
    /// Mean probability ratio seen in the last epoch.
    pub mean_ratio: f64,
    pub visited_states: usize,
}

/// One clipped-surrogate update on a batch of episodes with their advantages.
///
/// Advantages must have been computed against `policy.values`; returns for
/// the value regression are recovered as `A_t + V(s_t)`.
pub fn ppo_update(policy: &PolicyParams, batch: &[(EpisodeTrace, AdvantageTrace)], cfg: &SimConfig) -> (PolicyParams, UpdateStats) {
    let mut by_state: Vec<Vec<Sample>> = Vec::new();
    let mut returns_by_state: Vec<Vec<f64>> = Vec::new();
    let mut slot_of_state: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();

    let mut advantages: Vec<f64> = batch.iter().flat_map(|(_, a)| a.0.iter().copied()).collect();
    if cfg.whiten_advantages && advantages.len() > 1 {
        let n = advantages.len() as f64;
        let mean = advantages.iter().sum::<f64>() / n;
        let var = advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt() + 1e-8;
        for a in &mut advantages {
            *a = (*a - mean) / std;
        }
    }

    let mut cursor = 0;
    for (trace, adv) in batch {
        debug_assert_eq!(trace.steps.len(), adv.len());
        for (step, raw_adv) in trace.steps.iter().zip(&adv.0) {
            let state = step.observation.index();
            let slot = *slot_of_state.entry(state).or_insert_with(|| {
                by_state.push(Vec::new());
                returns_by_state.push(Vec::new());
                by_state.len() - 1
            });
            by_state[slot].push(Sample {
                action: step.action,
                advantage: advantages[cursor],
                old_log_prob: step.log_prob,
            });
            returns_by_state[slot].push(raw_adv + policy.value(state));
            cursor += 1;
        }
    }

    let mut next = policy.clone();
    let mut stats = UpdateStats {
        visited_states: slot_of_state.len(),
        ..UpdateStats::default()
    };
    let mut surrogate_total = 0.0;
    let mut ratio_total = 0.0;
    let mut sample_total = 0usize;

    for (&state, &slot) in &slot_of_state {
        let samples = &by_state[slot];
        let returns = &returns_by_state[slot];
        let reference: Vec<f64> = policy.reference_logits(state).to_vec();

        let (entropy, kl, _, lp, _) = entropy_and_kl(policy.state_logits(state), &reference);
        stats.entropy += entropy;
        stats.kl += kl;
        for s in samples {
            let ratio = (lp[s.action.index()] - s.old_log_prob).exp();
            surrogate_total += clipped_term(ratio, s.advantage, cfg.clip).0;
        }
        sample_total += samples.len();

        for epoch in 0..cfg.update_epochs {
            let logits = next.state_logits(state).to_vec();
            if epoch + 1 == cfg.update_epochs {
                let lp = log_softmax(&logits);
                ratio_total += samples
                    .iter()
                    .map(|s| (lp[s.action.index()] - s.old_log_prob).exp())
                    .sum::<f64>();
            }
            let grad = surrogate_gradient(&logits, &reference, samples, cfg);
            for (l, g) in next.state_logits_mut(state).iter_mut().zip(grad) {
                *l += cfg.actor_step * g;
            }
        }

        let v = policy.value(state);
        let mean_return = returns.iter().sum::<f64>() / returns.len() as f64;
        stats.value_loss += returns.iter().map(|g| (g - v).powi(2)).sum::<f64>();
        next.values[state] = v + cfg.critic_step * (mean_return - v);
    }

    let visited = slot_of_state.len().max(1) as f64;
    let samples = sample_total.max(1) as f64;
    stats.entropy /= visited;
    stats.kl /= visited;
    stats.policy_objective = surrogate_total / samples;
    stats.value_loss /= samples;
    stats.mean_ratio = if sample_total == 0 { 1.0 } else { ratio_total / samples };
    (next, stats)
}
