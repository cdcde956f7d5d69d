//! Token-level N-gram repetition penalty.
//!
//! Every position covered by an N-gram window that already occurred at an
//! earlier window start receives the penalty `P`. Overlapping repeats do not
//! stack: a position is either `0` or `P`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default N-gram size used by the CLI.
pub const DEFAULT_NGRAM: usize = 40;
/// Default per-token penalty used by the CLI.
pub const DEFAULT_PENALTY: f64 = -0.05;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RepetitionError {
    #[error("active length {active} exceeds max length {max}")]
    ActiveExceedsMax { active: usize, max: usize },
    #[error("active length {active} exceeds the {supplied} supplied tokens")]
    ActiveExceedsTokens { active: usize, supplied: usize },
    #[error("active length must be positive")]
    EmptyActive,
    #[error("n-gram size must be positive")]
    ZeroNgram,
}

/// A token sequence with its active length `l` and output length `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<u32>,
    active_length: usize,
    max_length: usize,
}

impl TokenSequence {
    pub fn new(tokens: Vec<u32>, active_length: usize, max_length: usize) -> Result<Self, RepetitionError> {
        if active_length == 0 {
            return Err(RepetitionError::EmptyActive);
        }
        if active_length > max_length {
            return Err(RepetitionError::ActiveExceedsMax {
                active: active_length,
                max: max_length,
            });
        }
        if active_length > tokens.len() {
            return Err(RepetitionError::ActiveExceedsTokens {
                active: active_length,
                supplied: tokens.len(),
            });
        }
        Ok(Self {
            tokens,
            active_length,
            max_length,
        })
    }

    /// Whole sequence active, output length equal to the token count.
    pub fn full(tokens: Vec<u32>) -> Result<Self, RepetitionError> {
        let n = tokens.len();
        Self::new(tokens, n, n)
    }

    pub fn active(&self) -> &[u32] {
        &self.tokens[..self.active_length]
    }

    pub fn active_length(&self) -> usize {
        self.active_length
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }
}

/// Per-position penalties of length `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PenaltyVector {
    pub values: Vec<f64>,
}

impl PenaltyVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Sum of the penalties over `range`.
    pub fn sum_range(&self, range: std::ops::Range<usize>) -> f64 {
        self.values[range].iter().sum()
    }
}

/// Marks the positions covered by repeated windows of size `ngram`.
fn repeated_coverage(seq: &[u32], ngram: usize) -> (Vec<bool>, usize) {
    let mut covered = vec![false; seq.len()];
    let mut repeats = 0;
    if ngram > seq.len() {
        return (covered, repeats);
    }
    let mut seen: HashSet<&[u32]> = HashSet::with_capacity(seq.len() - ngram + 1);
    for (start, window) in seq.windows(ngram).enumerate() {
        if seen.contains(window) {
            repeats += 1;
            covered[start..start + ngram].fill(true);
        } else {
            seen.insert(window);
        }
    }
    (covered, repeats)
}

/// Token-level repetition penalty over the active prefix of `seq`.
pub fn ngram_repetition_penalty(seq: &TokenSequence, ngram: usize, penalty: f64) -> Result<PenaltyVector, RepetitionError> {
    if ngram == 0 {
        return Err(RepetitionError::ZeroNgram);
    }
    if penalty > 0.0 {
        tracing::warn!(penalty, "positive repetition penalty rewards repetition");
    }
    let (covered, _) = repeated_coverage(seq.active(), ngram);
    let mut values = vec![0.0; seq.max_length];
    for (slot, hit) in values.iter_mut().zip(covered) {
        if hit {
            *slot = penalty;
        }
    }
    Ok(PenaltyVector { values })
}

/// Summary used to spot length hacking through repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepetitionStats {
    /// Number of windows whose N-gram already occurred earlier.
    pub repeated_windows: usize,
    /// Fraction of active positions covered by a repeated window.
    pub penalized_fraction: f64,
}

pub fn repetition_stats(seq: &TokenSequence, ngram: usize) -> Result<RepetitionStats, RepetitionError> {
    if ngram == 0 {
        return Err(RepetitionError::ZeroNgram);
    }
    let (covered, repeated_windows) = repeated_coverage(seq.active(), ngram);
    let hits = covered.iter().filter(|&&c| c).count();
    Ok(RepetitionStats {
        repeated_windows,
        penalized_fraction: hits as f64 / seq.active_length as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_ngrams_are_free() {
        let seq = TokenSequence::full(vec![1, 2, 3, 4, 5]).unwrap();
        let r = ngram_repetition_penalty(&seq, 2, -0.05).unwrap();
        assert_eq!(r.values, vec![0.0; 5]);
        let s = repetition_stats(&seq, 2).unwrap();
        assert_eq!(s.repeated_windows, 0);
        assert_eq!(s.penalized_fraction, 0.0);
    }

    #[test]
    fn alternating_trace() {
        let seq = TokenSequence::full(vec![7, 8, 7, 8, 7, 8]).unwrap();
        let r = ngram_repetition_penalty(&seq, 2, -0.05).unwrap();
        assert_eq!(r.values, vec![0.0, 0.0, -0.05, -0.05, -0.05, -0.05]);
        let s = repetition_stats(&seq, 2).unwrap();
        assert_eq!(s.repeated_windows, 3);
        assert!((s.penalized_fraction - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn ngram_longer_than_sequence() {
        let seq = TokenSequence::full(vec![1, 2, 3]).unwrap();
        assert_eq!(ngram_repetition_penalty(&seq, 5, -0.05).unwrap().values, vec![0.0; 3]);
    }

    #[test]
    fn padding_beyond_active_is_zero() {
        let seq = TokenSequence::new(vec![4, 4, 4, 4, 9, 9], 4, 8).unwrap();
        let r = ngram_repetition_penalty(&seq, 1, -1.0).unwrap();
        assert_eq!(r.values, vec![0.0, -1.0, -1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn input_errors() {
        assert_eq!(
            TokenSequence::new(vec![1, 2, 3], 3, 2),
            Err(RepetitionError::ActiveExceedsMax { active: 3, max: 2 })
        );
        assert_eq!(
            TokenSequence::new(vec![1], 2, 4),
            Err(RepetitionError::ActiveExceedsTokens { active: 2, supplied: 1 })
        );
        let seq = TokenSequence::full(vec![1, 2]).unwrap();
        assert_eq!(ngram_repetition_penalty(&seq, 0, -0.05), Err(RepetitionError::ZeroNgram));
    }

    #[test]
    fn positive_penalty_is_allowed() {
        let seq = TokenSequence::full(vec![1, 1]).unwrap();
        assert_eq!(ngram_repetition_penalty(&seq, 1, 0.5).unwrap().values, vec![0.0, 0.5]);
    }
}
