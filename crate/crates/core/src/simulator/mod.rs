//! A synthetic chain-of-thought MDP with a tabular softmax policy.
//!
//! Each episode is a problem of difficulty `d`. The policy emits token blocks
//! through four macro-actions:
//!
//! - `Work` adds fresh tokens and, if the current approach is viable, raises
//!   progress `p` with probability `work_progress_prob`.
//! - `Branch` starts a new approach (block opens with the reserved `ALT`
//!   token) and re-samples viability.
//! - `Repeat` copies the previous block verbatim.
//! - `Answer` ends the episode; it is correct with probability
//!   `1 / (1 + exp(-steepness * (p - d)))`.
//!
//! If no block fits under `max_length` the episode ends as `Exceeded`.
//! Rewards come from [`crate::reward`] and [`crate::repetition`], advantages
//! from [`crate::advantage`], and the policy is trained with a clipped
//! surrogate objective in [`ppo`].

mod config;
mod env;
mod experiment;
mod policy;
pub mod ppo;
mod rewards;

pub use config::{ConfigError, RewardSpec, SimConfig, SIM_PRESETS};
pub use env::{rollout, Action, EpisodeTrace, Observation, Outcome, Step, ALT_TOKEN, FILLER_TOKEN};
pub use experiment::{episode_seed, gamma_sweep, GAMMA_SWEEP, run_experiment, run_experiment_with, Experiment, IterationStats};
pub use policy::PolicyParams;
pub use ppo::{ppo_update, UpdateStats};
pub use rewards::assign_rewards;
