//! Reward engineering toolkit for long chain-of-thought RL.
//!
//! The crate is organised by concern:
//!
//! - [`reward`]: scalar terminal rewards (classic, three-way, length-shaped cosine).
//! - [`repetition`]: token-level N-gram repetition penalty.
//! - [`advantage`]: multi-discount advantage estimation and single-channel GAE.
//! - [`verifier`]: rule-based answer extraction, canonicalisation and grading.
//! - [`analysis`]: behavioural metrics over batches of responses.
//! - [`corpus`]: MinHash signatures, LSH deduplication and phrase mining.
//! - [`simulator`]: a synthetic chain-of-thought MDP trained with a clipped surrogate.
//! - [`orchestrator`]: LLM-backed verifier, answer extraction and action prompting.
//! - [`pipeline`]: JSONL streaming, global configuration and dataset assembly.
//!
//! Data-parallel loops go through [`par::Executor`], which uses rayon when the
//! `parallel` feature is enabled and falls back to a sequential loop otherwise.

pub mod advantage;
pub mod analysis;
pub mod corpus;
pub mod orchestrator;
pub mod par;
pub mod pipeline;
pub mod repetition;
pub mod reward;
pub mod simulator;
pub mod verifier;

pub use advantage::{gae_single, multi_channel_advantage, AdvantageTrace, ChannelTrace, ValueTrace};
pub use reward::{CorrectnessLabel, RewardConfig};
