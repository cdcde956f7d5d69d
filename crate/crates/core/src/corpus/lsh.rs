use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::minhash::{jaccard_estimate, MinHashSignature, MinHasher};
use super::{CorpusError, Document};
use crate::par::Executor;

/// LSH deduplication parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DedupConfig {
    /// Word shingle size.
    pub k: usize,
    pub num_hashes: usize,
    pub bands: usize,
    pub rows: usize,
    /// Minimum estimated Jaccard for a candidate pair to be linked.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            k: 5,
            num_hashes: 128,
            bands: 16,
            rows: 8,
            threshold: 0.8,
            seed: 0,
        }
    }
}

impl DedupConfig {
    pub fn check(&self) -> Result<(), CorpusError> {
        if self.k == 0 || self.num_hashes == 0 {
            return Err(CorpusError::ZeroParameter);
        }
        if self.bands * self.rows != self.num_hashes {
            return Err(CorpusError::Banding {
                bands: self.bands,
                rows: self.rows,
                num_hashes: self.num_hashes,
            });
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(CorpusError::BadThreshold(self.threshold));
        }
        Ok(())
    }
}

/// A connected component of near-duplicates. `members` is sorted and
/// `representative` (the smallest id) is the copy that is kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub representative: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DedupResult {
    /// Clusters sorted by representative.
    pub clusters: Vec<Cluster>,
    /// Ids of documents without any word, left out of clustering.
    pub skipped: Vec<String>,
    pub candidate_pairs: usize,
    pub confirmed_pairs: usize,
}

impl DedupResult {
    pub fn kept_ids(&self) -> impl Iterator<Item = &str> {
        self.clusters.iter().map(|c| c.representative.as_str())
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // The smaller index stays root so roots follow the canonical order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn band_key(band: &[u64]) -> u64 {
    band.iter().fold(0xcbf2_9ce4_8422_2325u64, |acc, v| {
        (acc ^ v).wrapping_mul(0x0000_0100_0000_01b3).rotate_left(29)
    })
}

/// Clusters near-duplicate documents with banded MinHash LSH.
///
/// The result does not depend on the input order: documents are processed
/// in id order and every cluster keeps its smallest id.
pub fn lsh_dedup(docs: &[Document], cfg: &DedupConfig, exec: &Executor) -> Result<DedupResult, CorpusError> {
    cfg.check()?;
    let hasher = MinHasher::new(cfg.k, cfg.num_hashes, cfg.seed)?;

    let mut order: Vec<&Document> = docs.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.text.cmp(&b.text)));

    let signatures: Vec<Option<MinHashSignature>> = exec.map(&order, |d| hasher.signature(&d.text).ok());

    let mut skipped = Vec::new();
    let mut live: Vec<usize> = Vec::new();
    for (i, sig) in signatures.iter().enumerate() {
        if sig.is_some() {
            live.push(i);
        } else {
            skipped.push(order[i].id.clone());
        }
    }

    let mut buckets: HashMap<(usize, u64), Vec<usize>> = HashMap::new();
    for &i in &live {
        let sig = signatures[i].as_ref().expect("live signature");
        for (band, chunk) in sig.values.chunks(cfg.rows).enumerate() {
            buckets.entry((band, band_key(chunk))).or_default().push(i);
        }
    }

    let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
    for members in buckets.values() {
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                candidates.insert((a.min(b), a.max(b)));
            }
        }
    }

    let mut sets = DisjointSet::new(order.len());
    let mut confirmed = 0;
    for &(a, b) in &candidates {
        let (sa, sb) = (signatures[a].as_ref().unwrap(), signatures[b].as_ref().unwrap());
        if jaccard_estimate(sa, sb)? >= cfg.threshold {
            sets.union(a, b);
            confirmed += 1;
        }
    }

    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for &i in &live {
        let root = sets.find(i);
        groups.entry(root).or_default().push(i);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_values()
        .map(|mut idx| {
            idx.sort_unstable();
            let members: Vec<String> = idx.iter().map(|&i| order[i].id.clone()).collect();
            Cluster {
                representative: members[0].clone(),
                members,
            }
        })
        .collect();
    clusters.sort_by(|a, b| a.representative.cmp(&b.representative));

    Ok(DedupResult {
        clusters,
        skipped,
        candidate_pairs: candidates.len(),
        confirmed_pairs: confirmed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, text: &str) -> Document {
        Document::new(id, text)
    }

    #[test]
    fn exact_duplicates_share_a_cluster() {
        let text = "a b c d e f g h i j k l m n o p";
        let docs = vec![doc("b", text), doc("a", text), doc("c", "something else entirely different here now")];
        let res = lsh_dedup(&docs, &DedupConfig::default(), &Executor::sequential()).unwrap();
        assert_eq!(res.clusters.len(), 2);
        assert_eq!(res.clusters[0].members, vec!["a", "b"]);
        assert_eq!(res.kept_ids().collect::<Vec<_>>(), vec!["a", "c"]);
    }

    #[test]
    fn banding_must_cover_lanes() {
        let cfg = DedupConfig {
            bands: 10,
            ..DedupConfig::default()
        };
        assert_eq!(
            lsh_dedup(&[], &cfg, &Executor::sequential()),
            Err(CorpusError::Banding { bands: 10, rows: 8, num_hashes: 128 })
        );
    }

    #[test]
    fn empty_documents_are_skipped() {
        let docs = vec![doc("x", "!!!"), doc("y", "words here")];
        let res = lsh_dedup(&docs, &DedupConfig::default(), &Executor::sequential()).unwrap();
        assert_eq!(res.skipped, vec!["x"]);
        assert_eq!(res.clusters.len(), 1);
    }
}
