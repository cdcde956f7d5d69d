//! Advantage estimation.
//!
//! [`multi_channel_advantage`] discounts every reward channel with its own
//! factor and sums the returns to the end of the episode (lambda = 1):
//!
//! ```text
//! A_t = sum_m sum_{l >= 0} gamma_m^l * r_{m, t+l}  -  V(s_t)
//! ```
//!
//! [`gae_single`] is ordinary single-channel GAE(lambda). Both treat the value
//! after the last step as zero because every episode terminates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AdvantageError {
    #[error("at least one reward channel is required")]
    NoChannels,
    #[error("channel {channel} has {got} rewards but the value trace has {expected}")]
    LengthMismatch { channel: usize, expected: usize, got: usize },
    #[error("discount {0} is outside [0, 1]")]
    BadGamma(f64),
    #[error("lambda {0} is outside (0, 1]")]
    BadLambda(f64),
    #[error("trace contains a non-finite value")]
    NonFinite,
}

/// Rewards of one channel, indexed by timestep, with that channel's discount.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTrace {
    pub rewards: Vec<f64>,
    pub gamma: f64,
}

impl ChannelTrace {
    pub fn new(rewards: Vec<f64>, gamma: f64) -> Result<Self, AdvantageError> {
        let trace = Self { rewards, gamma };
        trace.check()?;
        Ok(trace)
    }

    fn check(&self) -> Result<(), AdvantageError> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(AdvantageError::BadGamma(self.gamma));
        }
        if self.rewards.iter().any(|r| !r.is_finite()) {
            return Err(AdvantageError::NonFinite);
        }
        Ok(())
    }

    /// Discounted return-to-go of this channel at every timestep.
    pub fn returns(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rewards.len()];
        let mut acc = 0.0;
        for (t, r) in self.rewards.iter().enumerate().rev() {
            acc = r + self.gamma * acc;
            out[t] = acc;
        }
        out
    }
}

/// State values `V(s_t)` along one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueTrace(pub Vec<f64>);

impl ValueTrace {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Advantage estimates `A_t` along one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AdvantageTrace(pub Vec<f64>);

impl AdvantageTrace {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Sum over channels of the per-channel discounted return, minus the baseline.
pub fn multi_channel_advantage(channels: &[ChannelTrace], values: &ValueTrace) -> Result<AdvantageTrace, AdvantageError> {
    if channels.is_empty() {
        return Err(AdvantageError::NoChannels);
    }
    if values.0.iter().any(|v| !v.is_finite()) {
        return Err(AdvantageError::NonFinite);
    }
    let len = values.len();
    let mut total = vec![0.0; len];
    for (idx, channel) in channels.iter().enumerate() {
        channel.check()?;
        if channel.rewards.len() != len {
            return Err(AdvantageError::LengthMismatch {
                channel: idx,
                expected: len,
                got: channel.rewards.len(),
            });
        }
        for (acc, g) in total.iter_mut().zip(channel.returns()) {
            *acc += g;
        }
    }
    for (acc, v) in total.iter_mut().zip(&values.0) {
        *acc -= v;
    }
    Ok(AdvantageTrace(total))
}

/// Single-channel generalised advantage estimation.
pub fn gae_single(rewards: &[f64], values: &ValueTrace, gamma: f64, lambda: f64) -> Result<AdvantageTrace, AdvantageError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(AdvantageError::BadGamma(gamma));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(AdvantageError::BadLambda(lambda));
    }
    if rewards.len() != values.len() {
        return Err(AdvantageError::LengthMismatch {
            channel: 0,
            expected: values.len(),
            got: rewards.len(),
        });
    }
    if rewards.iter().chain(&values.0).any(|x| !x.is_finite()) {
        return Err(AdvantageError::NonFinite);
    }
    let v = &values.0;
    let mut out = vec![0.0; rewards.len()];
    let mut running = 0.0;
    if lambda == 1.0 {
        // The deltas telescope to the discounted return minus the baseline;
        // summing returns directly avoids the cancellation error.
        for t in (0..rewards.len()).rev() {
            running = rewards[t] + gamma * running;
            out[t] = running - v[t];
        }
        return Ok(AdvantageTrace(out));
    }
    for t in (0..rewards.len()).rev() {
        let next_value = v.get(t + 1).copied().unwrap_or(0.0);
        let delta = rewards[t] + gamma * next_value - v[t];
        running = delta + gamma * lambda * running;
        out[t] = running;
    }
    Ok(AdvantageTrace(out))
}
