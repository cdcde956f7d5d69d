use super::config::{RewardSpec, SimConfig};
use super::env::{EpisodeTrace, Outcome};
use crate::advantage::ChannelTrace;
use crate::repetition::{ngram_repetition_penalty, TokenSequence};
use crate::reward::{classic_reward, cosine_reward, three_way_reward, CorrectnessLabel};

fn terminal_reward(trace: &EpisodeTrace, cfg: &SimConfig) -> f64 {
    match &cfg.reward {
        RewardSpec::Classic => classic_reward(trace.outcome == Outcome::Correct),
        RewardSpec::ThreeWay => three_way_reward(match trace.outcome {
            Outcome::Correct => CorrectnessLabel::Correct,
            Outcome::Wrong => CorrectnessLabel::Wrong,
            Outcome::Exceeded => CorrectnessLabel::NoAnswer,
        }),
        RewardSpec::Cosine { .. } => {
            let rc = cfg
                .cosine_config()
                .ok()
                .flatten()
                .expect("validated simulator config carries a cosine preset");
            match trace.outcome {
                Outcome::Exceeded => rc.exceed_penalty,
                outcome => cosine_reward(outcome == Outcome::Correct, trace.length, &rc),
            }
        }
    }
}

/// Per-macro-step reward channels for one finished episode.
///
/// Channel 0 is the terminal correctness reward (discount `gamma_correct`).
/// When the repetition penalty is enabled, channel 1 holds the token-level
/// penalties summed within each step's block (discount `gamma_penalty`).
pub fn assign_rewards(trace: &EpisodeTrace, cfg: &SimConfig) -> Vec<ChannelTrace> {
    let n = trace.steps.len();
    let mut correctness = vec![0.0; n];
    if let Some(last) = correctness.last_mut() {
        *last = terminal_reward(trace, cfg);
    }
    let mut channels = vec![ChannelTrace {
        rewards: correctness,
        gamma: cfg.gamma_correct,
    }];
    if cfg.repetition_penalty {
        let tokens = trace.tokens();
        let mut per_step = vec![0.0; n];
        if let Ok(seq) = TokenSequence::full(tokens) {
            let penalties = ngram_repetition_penalty(&seq, cfg.repetition_ngram, cfg.repetition_value)
                .expect("validated n-gram size");
            let mut offset = 0;
            for (slot, step) in per_step.iter_mut().zip(&trace.steps) {
                let end = offset + step.tokens.len();
                *slot = penalties.sum_range(offset..end);
                offset = end;
            }
        }
        channels.push(ChannelTrace {
            rewards: per_step,
            gamma: cfg.gamma_penalty,
        });
    }
    channels
}
