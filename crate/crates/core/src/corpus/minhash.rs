use serde::{Deserialize, Serialize};

use super::CorpusError;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const SHINGLE_SEPARATOR: u8 = 0x1f;

fn fnv1a(bytes: &[u8], mut state: u64) -> u64 {
    for &b in bytes {
        state ^= u64::from(b);
        state = state.wrapping_mul(FNV_PRIME);
    }
    state
}

/// Murmur3 64-bit finaliser.
fn fmix64(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^= x >> 33;
    x
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Lowercases, drops punctuation and splits on whitespace.
pub fn normalize_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// Base 64-bit hash of a word k-gram.
pub fn shingle_hash<S: AsRef<str>>(words: &[S]) -> u64 {
    let mut state = FNV_OFFSET;
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            state = fnv1a(&[SHINGLE_SEPARATOR], state);
        }
        state = fnv1a(w.as_ref().as_bytes(), state);
    }
    state
}

/// Base hashes of every k-gram start position, in order (duplicates kept).
///
/// A document shorter than `k` words yields the single shingle of all its words.
pub(crate) fn positional_shingles(words: &[String], k: usize) -> Vec<u64> {
    if words.is_empty() {
        return Vec::new();
    }
    if words.len() < k {
        return vec![shingle_hash(words)];
    }
    words.windows(k).map(shingle_hash).collect()
}

/// The hashed word k-grams of one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShingleSet {
    /// Sorted, deduplicated shingle hashes.
    pub shingles: Vec<u64>,
    pub k: usize,
}

impl ShingleSet {
    pub fn from_text(text: &str, k: usize) -> Result<Self, CorpusError> {
        if k == 0 {
            return Err(CorpusError::ZeroParameter);
        }
        let words = normalize_words(text);
        if words.is_empty() {
            return Err(CorpusError::EmptyDocument);
        }
        let mut shingles = positional_shingles(&words, k);
        shingles.sort_unstable();
        shingles.dedup();
        Ok(Self { shingles, k })
    }

    pub fn len(&self) -> usize {
        self.shingles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shingles.is_empty()
    }

    /// Exact Jaccard similarity of two shingle sets.
    pub fn jaccard(&self, other: &ShingleSet) -> f64 {
        let (mut i, mut j, mut inter) = (0, 0, 0usize);
        while i < self.shingles.len() && j < other.shingles.len() {
            match self.shingles[i].cmp(&other.shingles[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    inter += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        let union = self.shingles.len() + other.shingles.len() - inter;
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// Per-lane minima of the seeded hash family over a shingle set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinHashSignature {
    pub values: Vec<u64>,
    pub seed: u64,
    pub k: usize,
}

/// A seeded family of `num_hashes` lane hashes: `fmix64((x ^ b_i) * a_i)`.
#[derive(Debug, Clone)]
pub struct MinHasher {
    k: usize,
    seed: u64,
    mul: Vec<u64>,
    xor: Vec<u64>,
}

impl MinHasher {
    pub fn new(k: usize, num_hashes: usize, seed: u64) -> Result<Self, CorpusError> {
        if k == 0 || num_hashes == 0 {
            return Err(CorpusError::ZeroParameter);
        }
        let mut state = seed;
        let mut mul = Vec::with_capacity(num_hashes);
        let mut xor = Vec::with_capacity(num_hashes);
        for _ in 0..num_hashes {
            mul.push(splitmix64(&mut state) | 1);
            xor.push(splitmix64(&mut state));
        }
        Ok(Self { k, seed, mul, xor })
    }

    pub fn num_hashes(&self) -> usize {
        self.mul.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn lane_hash(&self, lane: usize, base: u64) -> u64 {
        fmix64((base ^ self.xor[lane]).wrapping_mul(self.mul[lane]))
    }

    /// Signature from precomputed base hashes (duplicates are harmless).
    pub fn signature_of_hashes(&self, hashes: &[u64]) -> MinHashSignature {
        let mut values = vec![u64::MAX; self.num_hashes()];
        for &h in hashes {
            for (lane, slot) in values.iter_mut().enumerate() {
                let v = self.lane_hash(lane, h);
                if v < *slot {
                    *slot = v;
                }
            }
        }
        MinHashSignature {
            values,
            seed: self.seed,
            k: self.k,
        }
    }

    pub fn signature_of_set(&self, set: &ShingleSet) -> MinHashSignature {
        let mut sig = self.signature_of_hashes(&set.shingles);
        sig.k = set.k;
        sig
    }

    pub fn signature(&self, text: &str) -> Result<MinHashSignature, CorpusError> {
        let words = normalize_words(text);
        if words.is_empty() {
            return Err(CorpusError::EmptyDocument);
        }
        Ok(self.signature_of_hashes(&positional_shingles(&words, self.k)))
    }
}

/// MinHash signature of `text` over word `k`-grams.
pub fn minhash_signature(text: &str, k: usize, num_hashes: usize, seed: u64) -> Result<MinHashSignature, CorpusError> {
    MinHasher::new(k, num_hashes, seed)?.signature(text)
}

/// Fraction of lanes on which two signatures agree.
pub fn jaccard_estimate(a: &MinHashSignature, b: &MinHashSignature) -> Result<f64, CorpusError> {
    if a.values.len() != b.values.len() || a.seed != b.seed || a.k != b.k || a.values.is_empty() {
        return Err(CorpusError::SignatureMismatch);
    }
    let matching = a.values.iter().zip(&b.values).filter(|(x, y)| x == y).count();
    Ok(matching as f64 / a.values.len() as f64)
}
