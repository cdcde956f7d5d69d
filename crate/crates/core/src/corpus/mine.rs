use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::minhash::{jaccard_estimate, normalize_words, positional_shingles, MinHashSignature, MinHasher};
use super::{CorpusError, Document};
use crate::par::Executor;

/// Phrase list shipped with the crate, one phrase per line.
pub const DEFAULT_PHRASES: &str = include_str!("../../data/phrases.txt");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MineConfig {
    pub k: usize,
    pub num_hashes: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for MineConfig {
    fn default() -> Self {
        Self {
            k: 2,
            num_hashes: 128,
            threshold: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseMatch {
    pub id: String,
    pub phrase: String,
    pub score: f64,
}

/// Parses a phrase file: one phrase per line, blank lines ignored.
pub fn parse_phrases(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect()
}

struct PreparedPhrase<'a> {
    raw: &'a str,
    words: Vec<String>,
    /// Signature at shingle size `min(k, words.len())`.
    signature: MinHashSignature,
}

/// Per-position lane hashes for one shingle size, computed once per document.
struct LaneTable {
    lanes: usize,
    values: Vec<u64>,
}

impl LaneTable {
    fn new(hasher: &MinHasher, shingles: &[u64]) -> Self {
        let lanes = hasher.num_hashes();
        let mut values = Vec::with_capacity(shingles.len() * lanes);
        for &s in shingles {
            values.extend((0..lanes).map(|lane| hasher.lane_hash(lane, s)));
        }
        Self { lanes, values }
    }

    fn window_minima(&self, start: usize, count: usize, out: &mut [u64]) {
        out.fill(u64::MAX);
        for row in self.values[start * self.lanes..(start + count) * self.lanes].chunks_exact(self.lanes) {
            for (slot, &v) in out.iter_mut().zip(row) {
                if v < *slot {
                    *slot = v;
                }
            }
        }
    }
}

/// Best MinHash agreement between `target` and any `width`-word window of `words`.
fn best_window_score(words: &[String], width: usize, target: &MinHashSignature, table: &LaneTable) -> f64 {
    let per_window = width - target.k + 1;
    let windows = words.len() - width + 1;
    let mut scratch = target.clone();
    let mut best = 0.0f64;
    for start in 0..windows {
        table.window_minima(start, per_window, &mut scratch.values);
        let score = jaccard_estimate(&scratch, target).unwrap_or(0.0);
        if score > best {
            best = score;
            if best >= 1.0 {
                break;
            }
        }
    }
    best
}

/// Finds documents containing (near-)occurrences of the given phrases.
///
/// A verbatim occurrence scores 1.0. Otherwise every window of the document
/// as wide as the phrase is compared by MinHash and the best score is kept.
/// A document shorter than the phrase is compared as a whole. At most one
/// match is emitted per (document, phrase), in input order.
pub fn phrase_mine(docs: &[Document], phrases: &[String], cfg: &MineConfig, exec: &Executor) -> Result<Vec<PhraseMatch>, CorpusError> {
    if !(0.0..=1.0).contains(&cfg.threshold) {
        return Err(CorpusError::BadThreshold(cfg.threshold));
    }
    if cfg.k == 0 || cfg.num_hashes == 0 {
        return Err(CorpusError::ZeroParameter);
    }
    // One hasher per shingle size so signature parameters always agree.
    let hashers = (1..=cfg.k)
        .map(|k| MinHasher::new(k, cfg.num_hashes, cfg.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let hasher_for = |k: usize| &hashers[k - 1];

    let prepared: Vec<PreparedPhrase<'_>> = phrases
        .iter()
        .filter_map(|raw| {
            let words = normalize_words(raw);
            if words.is_empty() {
                return None;
            }
            let k = cfg.k.min(words.len());
            let signature = hasher_for(k).signature_of_hashes(&positional_shingles(&words, k));
            Some(PreparedPhrase { raw, words, signature })
        })
        .collect();

    let per_doc = exec.map(docs, |doc| {
        let words = normalize_words(&doc.text);
        let mut tables: HashMap<usize, LaneTable> = HashMap::new();
        let mut found = Vec::new();
        for phrase in &prepared {
            let score = if doc.text.contains(phrase.raw) {
                1.0
            } else if words.is_empty() {
                0.0
            } else {
                let width = phrase.words.len().min(words.len());
                let k = cfg.k.min(width);
                let hasher = hasher_for(k);
                let table = tables
                    .entry(k)
                    .or_insert_with(|| LaneTable::new(hasher, &positional_shingles(&words, k)));
                if k == phrase.signature.k {
                    best_window_score(&words, width, &phrase.signature, table)
                } else {
                    let target = hasher.signature_of_hashes(&positional_shingles(&phrase.words, k));
                    best_window_score(&words, width, &target, table)
                }
            };
            if score > 0.0 && score >= cfg.threshold {
                found.push(PhraseMatch {
                    id: doc.id.clone(),
                    phrase: phrase.raw.to_string(),
                    score,
                });
            }
        }
        found
    });
    Ok(per_doc.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_phrase_list() {
        let phrases = parse_phrases(DEFAULT_PHRASES);
        assert_eq!(phrases.len(), 31);
        assert_eq!(phrases[0], "Let's think step by step.");
    }

    #[test]
    fn verbatim_scores_one() {
        let docs = vec![Document::new("d", "First, Let's think step by step. Then compute.")];
        let phrases = vec!["Let's think step by step.".to_string()];
        let out = phrase_mine(&docs, &phrases, &MineConfig::default(), &Executor::sequential()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].score, 1.0);
    }

    #[test]
    fn no_overlap_no_match() {
        let docs = vec![Document::new("d", "completely unrelated prose about gardening and soil")];
        let phrases = vec!["Let's think step by step.".to_string()];
        let out = phrase_mine(&docs, &phrases, &MineConfig::default(), &Executor::sequential()).unwrap();
        assert!(out.is_empty());
    }
}
