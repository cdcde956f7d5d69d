//! Rule-based answer verification.
//!
//! Answers are extracted from the last `\boxed{...}` group (or a trailing
//! "final answer is" phrase), canonicalised, and compared exactly. Numbers are
//! compared as reduced big rationals, never as floats. Anything that is not a
//! number or a boolean falls back to normalised text comparison; matrices,
//! intervals and expressions are therefore only equal when they normalise to
//! the same string.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::reward::CorrectnessLabel;

/// Longest normalised text answer still considered short-form.
pub const SHORT_FORM_MAX_CHARS: usize = 30;

const BOX_OPEN: &str = "\\boxed{";
const FINAL_ANSWER_MARKER: &str = "final answer is";

/// Comparable form of an answer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CanonicalAnswer {
    /// Exact number in lowest terms with a positive denominator.
    Rational(BigRational),
    Boolean(bool),
    Text(String),
}

impl CanonicalAnswer {
    pub fn is_short_form(&self) -> bool {
        match self {
            CanonicalAnswer::Rational(_) | CanonicalAnswer::Boolean(_) => true,
            CanonicalAnswer::Text(t) => !t.is_empty() && t.chars().count() <= SHORT_FORM_MAX_CHARS,
        }
    }
}

impl fmt::Display for CanonicalAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalAnswer::Rational(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            CanonicalAnswer::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            CanonicalAnswer::Boolean(b) => write!(f, "{b}"),
            CanonicalAnswer::Text(t) => f.write_str(t),
        }
    }
}

/// Returns the body of the balanced brace group starting right after `open`.
///
/// `\{` and `\}` are literal braces and do not change the nesting depth.
fn balanced_group(text: &str, open: usize) -> Option<&str> {
    let bytes = text.as_bytes();
    let mut depth = 1usize;
    let mut i = open;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if matches!(bytes.get(i + 1), Some(b'{') | Some(b'}') | Some(b'\\')) => {
                i += 2;
                continue;
            }
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[open..i]);
                }
            }
            _ => {}
        }
        i += 1;
    }
    None
}

/// Contents of the last `\boxed{...}` group, if it is balanced.
pub fn extract_last_boxed(text: &str) -> Option<&str> {
    let start = text.rfind(BOX_OPEN)?;
    balanced_group(text, start + BOX_OPEN.len())
}

/// Extracts the final answer from a response.
///
/// The last `\boxed{...}` wins. Without any box, the remainder of the line
/// after the last case-insensitive "final answer is" is used. An unbalanced
/// last box yields no answer.
pub fn extract_boxed(text: &str) -> Option<String> {
    if text.contains(BOX_OPEN) {
        return extract_last_boxed(text).map(str::to_string);
    }
    let lowered = text.to_ascii_lowercase();
    let at = lowered.rfind(FINAL_ANSWER_MARKER)? + FINAL_ANSWER_MARKER.len();
    let rest = text[at..].lines().next().unwrap_or("");
    let cleaned = rest
        .trim()
        .trim_start_matches(':')
        .trim()
        .trim_end_matches('.')
        .trim_matches('$')
        .trim();
    (!cleaned.is_empty()).then(|| cleaned.to_string())
}

fn strip_wrapper<'a>(s: &'a str, open: &str, close: &str) -> Option<&'a str> {
    s.strip_prefix(open)?.strip_suffix(close)
}

/// Removes math delimiters, spacing commands, sizing commands and whitespace.
fn surface_normalize(answer: &str) -> String {
    let mut s = answer.trim();
    loop {
        let before = s;
        if let Some(inner) = strip_wrapper(s, "$", "$") {
            s = inner.trim();
        }
        if let Some(inner) = strip_wrapper(s, "\\(", "\\)").or_else(|| strip_wrapper(s, "\\[", "\\]")) {
            s = inner.trim();
        }
        if before == s {
            break;
        }
    }
    let mut out = s.to_string();
    for cmd in ["\\qquad", "\\quad", "\\left", "\\right", "\\displaystyle", "\\,", "\\;", "\\:", "\\!", "\\ ", "~"] {
        out = out.replace(cmd, "");
    }
    out.retain(|c| !c.is_whitespace());
    for cmd in ["\\text{", "\\mathrm{", "\\textbf{", "\\mbox{"] {
        if out.starts_with(cmd) && balanced_group(&out, cmd.len()).map(str::len) == Some(out.len() - cmd.len() - 1) {
            out = out[cmd.len()..out.len() - 1].to_string();
        }
    }
    out
}

fn parse_unsigned_integer(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Digits with optional thousands separators, e.g. `12,345`.
fn parse_grouped_integer(s: &str) -> Option<BigInt> {
    let mut groups = s.split(',');
    let head = groups.next()?;
    if head.is_empty() || head.len() > 3 {
        return None;
    }
    let mut digits = head.to_string();
    let mut any = false;
    for g in groups {
        if g.len() != 3 {
            return None;
        }
        digits.push_str(g);
        any = true;
    }
    if !any {
        return None;
    }
    parse_unsigned_integer(&digits)
}

fn split_sign(s: &str) -> (bool, &str) {
    if let Some(rest) = s.strip_prefix('-') {
        (true, rest)
    } else {
        (false, s.strip_prefix('+').unwrap_or(s))
    }
}

fn apply_sign(negative: bool, r: BigRational) -> BigRational {
    if negative {
        -r
    } else {
        r
    }
}

/// Integers, finite decimals (including `.5` and `5.`), with an optional sign.
fn parse_decimal(s: &str) -> Option<BigRational> {
    let (negative, body) = split_sign(s);
    if let Some(n) = parse_unsigned_integer(body).or_else(|| parse_grouped_integer(body)) {
        return Some(apply_sign(negative, BigRational::from_integer(n)));
    }
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let numer: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    Some(apply_sign(negative, BigRational::new(numer, denom)))
}

fn parse_signed_integer(s: &str) -> Option<BigInt> {
    let (negative, body) = split_sign(s);
    let n = parse_unsigned_integer(body)?;
    Some(if negative { -n } else { n })
}

fn ratio(numer: BigInt, denom: BigInt) -> Option<BigRational> {
    (!denom.is_zero()).then(|| BigRational::new(numer, denom))
}

/// `\frac{a}{b}`, `\dfrac{a}{b}`, `\tfrac{a}{b}` and the `\frac12` shorthand.
fn parse_latex_fraction(s: &str) -> Option<BigRational> {
    let (negative, body) = split_sign(s);
    let rest = ["\\dfrac", "\\tfrac", "\\frac"]
        .iter()
        .find_map(|cmd| body.strip_prefix(cmd))?;
    let (numer, denom) = if rest.starts_with('{') {
        let numer = balanced_group(rest, 1)?;
        let after = &rest[numer.len() + 2..];
        if !after.starts_with('{') {
            return None;
        }
        let denom = balanced_group(after, 1)?;
        if after.len() != denom.len() + 2 {
            return None;
        }
        (numer, denom)
    } else {
        let bytes = rest.as_bytes();
        if bytes.len() != 2 || !bytes.iter().all(u8::is_ascii_digit) {
            return None;
        }
        (&rest[..1], &rest[1..])
    };
    let value = ratio(parse_signed_integer(numer)?, parse_signed_integer(denom)?)?;
    Some(apply_sign(negative, value))
}

/// `a/b` with signed integer parts.
fn parse_slash_fraction(s: &str) -> Option<BigRational> {
    let (numer, denom) = s.split_once('/')?;
    ratio(parse_signed_integer(numer)?, parse_signed_integer(denom)?)
}

/// Maps an answer string onto its comparable form.
pub fn canonicalize(answer: &str) -> CanonicalAnswer {
    let surface = surface_normalize(answer);
    if let Some(r) = parse_decimal(&surface)
        .or_else(|| parse_slash_fraction(&surface))
        .or_else(|| parse_latex_fraction(&surface))
    {
        return CanonicalAnswer::Rational(r);
    }
    let lowered = surface.to_lowercase();
    match lowered.as_str() {
        "true" => CanonicalAnswer::Boolean(true),
        "false" => CanonicalAnswer::Boolean(false),
        _ => CanonicalAnswer::Text(lowered),
    }
}

/// Extracted answer (if any) and label for one response against its gold answer.
pub fn grade(response: &str, gold: &str) -> (Option<String>, CorrectnessLabel) {
    match extract_boxed(response) {
        None => (None, CorrectnessLabel::NoAnswer),
        Some(extracted) => {
            let label = if canonicalize(&extracted) == canonicalize(gold) {
                CorrectnessLabel::Correct
            } else {
                CorrectnessLabel::Wrong
            };
            (Some(extracted), label)
        }
    }
}

/// True when the gold answer can be checked by [`grade`] without an LLM.
pub fn short_form_filterable(gold: &str) -> bool {
    canonicalize(gold).is_short_form()
}

/// One candidate response to grade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradeInput {
    pub problem_id: String,
    pub gold: String,
    pub response: String,
}

/// A graded response. `extracted` is `None` exactly when `label` is `NoAnswer`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedRecord {
    pub problem_id: String,
    pub gold: String,
    pub response: String,
    pub label: CorrectnessLabel,
    pub extracted: Option<String>,
}

impl GradedRecord {
    pub fn from_input(input: GradeInput) -> Self {
        let (extracted, label) = grade(&input.response, &input.gold);
        Self {
            problem_id: input.problem_id,
            gold: input.gold,
            response: input.response,
            label,
            extracted,
        }
    }
}

/// Counters reported by [`RejectionFilter`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FilterSummary {
    pub seen: usize,
    pub kept: usize,
    pub malformed: usize,
}

/// Streaming rejection sampler: keeps correct responses, optionally capped per problem.
pub struct RejectionFilter<I> {
    inner: I,
    keep_per_prompt: Option<usize>,
    kept_by_problem: HashMap<String, usize>,
    summary: FilterSummary,
}

impl<I, E> RejectionFilter<I>
where
    I: Iterator<Item = Result<GradeInput, E>>,
    E: fmt::Display,
{
    pub fn new(inner: I, keep_per_prompt: Option<usize>) -> Self {
        Self {
            inner,
            keep_per_prompt,
            kept_by_problem: HashMap::new(),
            summary: FilterSummary::default(),
        }
    }

    pub fn summary(&self) -> FilterSummary {
        self.summary
    }
}

impl<I, E> Iterator for RejectionFilter<I>
where
    I: Iterator<Item = Result<GradeInput, E>>,
    E: fmt::Display,
{
    type Item = GradedRecord;

    fn next(&mut self) -> Option<GradedRecord> {
        loop {
            let item = self.inner.next()?;
            self.summary.seen += 1;
            let input = match item {
                Ok(input) if !input.gold.trim().is_empty() => input,
                Ok(input) => {
                    self.summary.malformed += 1;
                    tracing::warn!(problem_id = %input.problem_id, "skipping record with empty gold answer");
                    continue;
                }
                Err(err) => {
                    self.summary.malformed += 1;
                    tracing::warn!(%err, "skipping malformed record");
                    continue;
                }
            };
            if let Some(cap) = self.keep_per_prompt {
                if self.kept_by_problem.get(&input.problem_id).copied().unwrap_or(0) >= cap {
                    continue;
                }
            }
            let record = GradedRecord::from_input(input);
            if record.label != CorrectnessLabel::Correct {
                continue;
            }
            *self.kept_by_problem.entry(record.problem_id.clone()).or_insert(0) += 1;
            self.summary.kept += 1;
            return Some(record);
        }
    }
}

/// Convenience wrapper over [`RejectionFilter`] for in-memory inputs.
pub fn rejection_filter<I>(records: I, keep_per_prompt: Option<usize>) -> (Vec<GradedRecord>, FilterSummary)
where
    I: IntoIterator<Item = GradeInput>,
{
    let mut filter = RejectionFilter::new(records.into_iter().map(Ok::<_, String>), keep_per_prompt);
    let kept: Vec<_> = filter.by_ref().collect();
    (kept, filter.summary())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rational(n: i64, d: i64) -> CanonicalAnswer {
        CanonicalAnswer::Rational(BigRational::new(n.into(), d.into()))
    }

    #[test]
    fn extraction() {
        assert_eq!(
            extract_boxed("so. The final answer is $\\boxed{\\frac{1}{2}}$").as_deref(),
            Some("\\frac{1}{2}")
        );
        assert_eq!(extract_boxed("no answer marker here"), None);
        assert_eq!(extract_boxed("\\boxed{3} then later \\boxed{7}").as_deref(), Some("7"));
        assert_eq!(extract_boxed("\\boxed{3} then \\boxed{7"), None);
        assert_eq!(extract_boxed("The Final Answer is 42.").as_deref(), Some("42"));
        assert_eq!(extract_boxed("\\boxed{\\{1,2\\}}").as_deref(), Some("\\{1,2\\}"));
        assert_eq!(extract_boxed("\\boxed{}").as_deref(), Some(""));
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonicalize("\\frac{1}{2}"), rational(1, 2));
        assert_eq!(canonicalize("0.5"), rational(1, 2));
        assert_eq!(canonicalize(".5"), rational(1, 2));
        assert_eq!(canonicalize("-\\dfrac{6}{4}"), rational(-3, 2));
        assert_eq!(canonicalize("\\frac12"), rational(1, 2));
        assert_eq!(canonicalize("12,000"), rational(12000, 1));
        assert_eq!(canonicalize("3/-6"), rational(-1, 2));
        assert_eq!(canonicalize("True"), CanonicalAnswer::Boolean(true));
        assert_eq!(canonicalize("\\text{False}"), CanonicalAnswer::Boolean(false));
        assert_eq!(canonicalize("  $x+1$ "), CanonicalAnswer::Text("x+1".into()));
        assert_eq!(canonicalize("1/0"), CanonicalAnswer::Text("1/0".into()));
        assert_eq!(canonicalize("\\frac{1}{0}"), CanonicalAnswer::Text("\\frac{1}{0}".into()));
    }

    #[test]
    fn grading_examples() {
        assert_eq!(grade("so \\boxed{0.5}", "\\frac{1}{2}").1, CorrectnessLabel::Correct);
        assert_eq!(grade("so \\boxed{2}", "3").1, CorrectnessLabel::Wrong);
        assert_eq!(grade("I am not sure", "3"), (None, CorrectnessLabel::NoAnswer));
    }

    #[test]
    fn short_form() {
        assert!(short_form_filterable("3/4"));
        assert!(short_form_filterable("True"));
        assert!(short_form_filterable("x^2+1"));
        assert!(!short_form_filterable(&"We prove the claim by induction. ".repeat(16)));
        assert!(!short_form_filterable("   "));
    }

    fn input(pid: &str, gold: &str, response: &str) -> GradeInput {
        GradeInput {
            problem_id: pid.into(),
            gold: gold.into(),
            response: response.into(),
        }
    }

    #[test]
    fn rejection_filter_keeps_correct() {
        let records = vec![
            input("p", "4", "\\boxed{4}"),
            input("p", "4", "\\boxed{5}"),
            input("p", "4", "no idea"),
            input("p", "4", "so \\boxed{4.0}"),
        ];
        let (kept, summary) = rejection_filter(records.clone(), None);
        assert_eq!(kept.len(), 2);
        assert_eq!(summary, FilterSummary { seen: 4, kept: 2, malformed: 0 });
        let (kept, _) = rejection_filter(records, Some(1));
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].response, "\\boxed{4}");
        assert!(rejection_filter(Vec::new(), None).0.is_empty());
    }

    #[test]
    fn rejection_filter_counts_malformed() {
        let items: Vec<Result<GradeInput, String>> = vec![
            Err("bad json".into()),
            Ok(input("q", "", "\\boxed{1}")),
            Ok(input("q", "1", "\\boxed{1}")),
        ];
        let mut f = RejectionFilter::new(items.into_iter(), None);
        assert_eq!(f.by_ref().count(), 1);
        assert_eq!(f.summary(), FilterSummary { seen: 3, kept: 1, malformed: 2 });
    }
}
