//! Behavioural metrics over batches of model responses.
//!
//! Matching is case-insensitive substring matching on the raw text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reflection keywords tracked by default.
pub const DEFAULT_KEYWORDS: [&str; 5] = ["wait", "recheck", "alternatively", "retry", "however"];

/// Pivot marker used as a proxy for branching.
pub const BRANCH_MARKER: &str = "alternatively,";

/// Marker that classifies a response as a coding-style solution.
pub const CODING_MARKER: &str = "```python";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("batch is empty")]
    EmptyBatch,
    #[error("keyword list is empty")]
    NoKeywords,
}

/// One model output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub id: String,
    pub text: String,
    pub token_length: u64,
}

pub type ResponseBatch = [Response];

/// Occurrence statistics of one keyword across a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeywordRate {
    /// Fraction of responses containing the keyword at least once.
    pub contain_fraction: f64,
    /// Mean number of occurrences per response.
    pub mean_count: f64,
}

/// Keyword rates keyed by keyword, in sorted order.
pub type KeywordReport = BTreeMap<String, KeywordRate>;

/// Non-overlapping, case-insensitive occurrences of `needle` in `haystack`.
pub fn count_occurrences(haystack: &str, needle: &str) -> usize {
    if needle.is_empty() {
        return 0;
    }
    haystack.to_lowercase().matches(&needle.to_lowercase()).count()
}

pub fn keyword_rates(batch: &ResponseBatch, keywords: &[&str]) -> Result<KeywordReport, AnalysisError> {
    if keywords.is_empty() {
        return Err(AnalysisError::NoKeywords);
    }
    let lowered: Vec<String> = batch.iter().map(|r| r.text.to_lowercase()).collect();
    let n = batch.len().max(1) as f64;
    let mut report = KeywordReport::new();
    for keyword in keywords {
        let needle = keyword.to_lowercase();
        let (mut containing, mut total) = (0usize, 0usize);
        for text in &lowered {
            let c = if needle.is_empty() { 0 } else { text.matches(&needle).count() };
            total += c;
            containing += usize::from(c > 0);
        }
        report.insert(
            keyword.to_string(),
            KeywordRate {
                contain_fraction: containing as f64 / n,
                mean_count: total as f64 / n,
            },
        );
    }
    Ok(report)
}

/// Number of `alternatively,` pivots in `text`.
pub fn branching_frequency(text: &str) -> usize {
    count_occurrences(text, BRANCH_MARKER)
}

/// Fraction of responses containing a Python code fence.
pub fn coding_rate(batch: &ResponseBatch) -> Result<f64, AnalysisError> {
    if batch.is_empty() {
        return Err(AnalysisError::EmptyBatch);
    }
    let coding = batch.iter().filter(|r| r.text.contains(CODING_MARKER)).count();
    Ok(coding as f64 / batch.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthStats {
    pub mean: f64,
    pub median: f64,
    pub max: u64,
    /// Fraction of responses that finished inside the window (`token_length < max_length`).
    pub terminated_rate: f64,
}

pub fn length_stats(batch: &ResponseBatch, max_length: u64) -> Result<LengthStats, AnalysisError> {
    if batch.is_empty() {
        return Err(AnalysisError::EmptyBatch);
    }
    let mut lengths: Vec<u64> = batch.iter().map(|r| r.token_length).collect();
    lengths.sort_unstable();
    let n = lengths.len();
    let mean = lengths.iter().map(|&l| l as f64).sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        lengths[n / 2] as f64
    } else {
        (lengths[n / 2 - 1] as f64 + lengths[n / 2] as f64) / 2.0
    };
    let terminated = lengths.iter().filter(|&&l| l < max_length).count();
    Ok(LengthStats {
        mean,
        median,
        max: lengths[n - 1],
        terminated_rate: terminated as f64 / n as f64,
    })
}

/// Everything `analyze` reports for one batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub responses: usize,
    pub keywords: KeywordReport,
    pub mean_branching: f64,
    pub coding_rate: f64,
    pub lengths: LengthStats,
}

pub fn analyze(batch: &ResponseBatch, keywords: &[&str], max_length: u64) -> Result<AnalysisReport, AnalysisError> {
    let lengths = length_stats(batch, max_length)?;
    let branches: usize = batch.iter().map(|r| branching_frequency(&r.text)).sum();
    Ok(AnalysisReport {
        responses: batch.len(),
        keywords: keyword_rates(batch, keywords)?,
        mean_branching: branches as f64 / batch.len() as f64,
        coding_rate: coding_rate(batch)?,
        lengths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resp(text: &str, len: u64) -> Response {
        Response {
            id: String::new(),
            text: text.into(),
            token_length: len,
        }
    }

    #[test]
    fn keyword_counts_and_fractions() {
        let batch = [resp("Wait, wait. Let me think.", 5), resp("Done.", 1)];
        let report = keyword_rates(&batch, &["wait", "retry"]).unwrap();
        assert_eq!(report["wait"].contain_fraction, 0.5);
        assert_eq!(report["wait"].mean_count, 1.0);
        assert_eq!(report["retry"].contain_fraction, 0.0);
        assert_eq!(report["retry"].mean_count, 0.0);
        assert_eq!(keyword_rates(&batch, &[]), Err(AnalysisError::NoKeywords));
    }

    #[test]
    fn default_keywords() {
        assert_eq!(DEFAULT_KEYWORDS, ["wait", "recheck", "alternatively", "retry", "however"]);
    }

    #[test]
    fn branching() {
        assert_eq!(branching_frequency("Alternatively, we could... alternatively, try"), 2);
        assert_eq!(branching_frequency("alternative approach"), 0);
        assert_eq!(branching_frequency("Alternatively x"), 0);
        let pivots = "But the fixed points fail.\n\nWait, maybe not.\n\n\
                      Alternatively, p might be a bijection.\n\nWait, four roots are claimed.\n\n\
                      Alternatively, expand p(p(x)) - x directly.";
        assert_eq!(branching_frequency(pivots), 2);
    }

    #[test]
    fn coding() {
        let batch = [
            resp("```python\nprint(1)\n```", 1),
            resp("say \"```python\" in quotes", 1),
            resp("```python", 1),
            resp("plain", 1),
        ];
        assert_eq!(coding_rate(&batch).unwrap(), 0.75);
        assert_eq!(coding_rate(&[]), Err(AnalysisError::EmptyBatch));
    }

    #[test]
    fn lengths() {
        let s = length_stats(&[resp("", 10), resp("", 20), resp("", 16384)], 16384).unwrap();
        assert!((s.terminated_rate - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.max, 16384);
        let s = length_stats(&[resp("", 1), resp("", 2), resp("", 3)], 100).unwrap();
        assert_eq!((s.mean, s.median, s.terminated_rate), (2.0, 2.0, 1.0));
        let s = length_stats(&[resp("", 1), resp("", 4)], 100).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(length_stats(&[], 10), Err(AnalysisError::EmptyBatch));
    }
}
