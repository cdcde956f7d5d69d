use serde::{Deserialize, Serialize};

use super::env::{Action, Observation};

pub(crate) const NUM_ACTIONS: usize = 4;

pub(crate) fn softmax(logits: &[f64]) -> [f64; NUM_ACTIONS] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; NUM_ACTIONS];
    let mut total = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        total += *o;
    }
    for o in &mut out {
        *o /= total;
    }
    out
}

pub(crate) fn log_softmax(logits: &[f64]) -> [f64; NUM_ACTIONS] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    let mut out = [0.0; NUM_ACTIONS];
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = l - lse;
    }
    out
}

/// `KL(p || q)` for two logit rows.
pub(crate) fn kl_logits(p_logits: &[f64], q_logits: &[f64]) -> f64 {
    let lp = log_softmax(p_logits);
    let lq = log_softmax(q_logits);
    lp.iter().zip(&lq).map(|(a, b)| a.exp() * (a - b)).sum()
}

/// Tabular softmax policy and state-value table.
///
/// The initial logits are kept as the reference for the KL penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub logits: Vec<f64>,
    pub values: Vec<f64>,
    pub reference: Vec<f64>,
}

impl PolicyParams {
    /// Uniform policy with zero values.
    pub fn uniform() -> Self {
        Self::from_logits(vec![0.0; Observation::NUM_STATES * NUM_ACTIONS])
    }

    /// Policy with the given logits (also used as the reference).
    pub fn from_logits(logits: Vec<f64>) -> Self {
        assert_eq!(logits.len(), Observation::NUM_STATES * NUM_ACTIONS, "logit table size");
        Self {
            values: vec![0.0; Observation::NUM_STATES],
            reference: logits.clone(),
            logits,
        }
    }

    /// Same action preferences in every state.
    pub fn constant(action_logits: [f64; NUM_ACTIONS]) -> Self {
        let logits = action_logits
            .iter()
            .copied()
            .cycle()
            .take(Observation::NUM_STATES * NUM_ACTIONS)
            .collect();
        Self::from_logits(logits)
    }

    pub fn state_logits(&self, state: usize) -> &[f64] {
        &self.logits[state * NUM_ACTIONS..(state + 1) * NUM_ACTIONS]
    }

    pub fn state_logits_mut(&mut self, state: usize) -> &mut [f64] {
        &mut self.logits[state * NUM_ACTIONS..(state + 1) * NUM_ACTIONS]
    }

    pub fn reference_logits(&self, state: usize) -> &[f64] {
        &self.reference[state * NUM_ACTIONS..(state + 1) * NUM_ACTIONS]
    }

    pub fn probs(&self, state: usize) -> [f64; NUM_ACTIONS] {
        softmax(self.state_logits(state))
    }

    pub fn log_prob(&self, state: usize, action: Action) -> f64 {
        log_softmax(self.state_logits(state))[action.index()]
    }

    pub fn value(&self, state: usize) -> f64 {
        self.values[state]
    }

    /// `KL(current || reference)` at one state.
    pub fn kl_to_reference(&self, state: usize) -> f64 {
        kl_logits(self.state_logits(state), self.reference_logits(state))
    }

    pub fn is_finite(&self) -> bool {
        self.logits.iter().chain(&self.values).all(|x| x.is_finite())
    }
}
