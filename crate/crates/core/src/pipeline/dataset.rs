use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::reward::CorrectnessLabel;
use crate::verifier::short_form_filterable;

/// One problem, optionally with a reference answer and a graded response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub problem_id: String,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<CorrectnessLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptsetMode {
    /// Every record with a gold answer.
    Unfiltered,
    /// Only records whose gold answer is short-form checkable.
    Filtered,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PromptsetSummary {
    pub seen: usize,
    pub kept: usize,
    pub missing_gold: usize,
    pub duplicate_ids: usize,
    pub malformed: usize,
}

impl PromptsetSummary {
    /// Kept over seen (0 for an empty input).
    pub fn ratio(&self) -> f64 {
        if self.seen == 0 {
            0.0
        } else {
            self.kept as f64 / self.seen as f64
        }
    }
}

/// Streaming RL prompt-set builder over parsed records.
///
/// Records without a gold answer, repeated ids and malformed inputs are
/// skipped and counted.
pub struct PromptsetFilter<I> {
    inner: I,
    mode: PromptsetMode,
    ids: HashSet<String>,
    summary: PromptsetSummary,
}

impl<I, E> PromptsetFilter<I>
where
    I: Iterator<Item = Result<DatasetRecord, E>>,
    E: fmt::Display,
{
    pub fn new(inner: I, mode: PromptsetMode) -> Self {
        Self {
            inner,
            mode,
            ids: HashSet::new(),
            summary: PromptsetSummary::default(),
        }
    }

    pub fn summary(&self) -> PromptsetSummary {
        self.summary
    }
}

impl<I, E> Iterator for PromptsetFilter<I>
where
    I: Iterator<Item = Result<DatasetRecord, E>>,
    E: fmt::Display,
{
    type Item = DatasetRecord;

    fn next(&mut self) -> Option<DatasetRecord> {
        loop {
            let item = self.inner.next()?;
            self.summary.seen += 1;
            let record = match item {
                Ok(r) => r,
                Err(err) => {
                    self.summary.malformed += 1;
                    tracing::warn!(%err, "skipping malformed record");
                    continue;
                }
            };
            let Some(gold) = record.gold.as_deref().filter(|g| !g.trim().is_empty()) else {
                self.summary.missing_gold += 1;
                continue;
            };
            // The first record with a gold answer claims the id in both modes,
            // so filtered output stays a subset of unfiltered output.
            if !self.ids.insert(record.problem_id.clone()) {
                self.summary.duplicate_ids += 1;
                tracing::warn!(problem_id = %record.problem_id, "skipping repeated problem id");
                continue;
            }
            if self.mode == PromptsetMode::Filtered && !short_form_filterable(gold) {
                continue;
            }
            self.summary.kept += 1;
            return Some(record);
        }
    }
}

/// In-memory convenience wrapper over [`PromptsetFilter`].
pub fn build_rl_promptset<I>(records: I, mode: PromptsetMode) -> (Vec<DatasetRecord>, PromptsetSummary)
where
    I: IntoIterator<Item = DatasetRecord>,
{
    let mut filter = PromptsetFilter::new(records.into_iter().map(Ok::<_, String>), mode);
    let kept: Vec<_> = filter.by_ref().collect();
    (kept, filter.summary())
}
