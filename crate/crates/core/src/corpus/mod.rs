//! Corpus tooling: MinHash signatures, LSH-banded near-duplicate clustering,
//! and fuzzy phrase mining over document collections.

mod lsh;
mod minhash;
mod mine;

pub use lsh::{lsh_dedup, Cluster, DedupConfig, DedupResult};
pub use minhash::{
    jaccard_estimate, minhash_signature, normalize_words, shingle_hash, MinHashSignature, MinHasher, ShingleSet,
};
pub use mine::{parse_phrases, phrase_mine, MineConfig, PhraseMatch, DEFAULT_PHRASES};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("document has no words")]
    EmptyDocument,
    #[error("shingle size and lane count must be positive")]
    ZeroParameter,
    #[error("signatures were built with different parameters")]
    SignatureMismatch,
    #[error("bands ({bands}) x rows ({rows}) must equal num_hashes ({num_hashes})")]
    Banding { bands: usize, rows: usize, num_hashes: usize },
    #[error("threshold {0} is outside [0, 1]")]
    BadThreshold(f64),
}

/// A document as read from `{"id": ..., "text": ...}` JSONL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }
}
