use super::client::{CompletionClient, CompletionRequest};
use super::template::Template;
use crate::reward::CorrectnessLabel;
use crate::verifier::extract_last_boxed;

/// Number of trailing response lines shown to the judge.
pub const VERIFY_TAIL_LINES: usize = 20;

const VERIFY_MAX_TOKENS: u32 = 1024;
const EXTRACT_MAX_TOKENS: u32 = 512;
const JUDGEMENT_MARKERS: [&str; 2] = ["judgement:", "judgment:"];

/// The last `n` newline-separated lines of `text`.
pub fn last_lines(text: &str, n: usize) -> &str {
    if n == 0 {
        return "";
    }
    match text.rmatch_indices('\n').nth(n - 1) {
        Some((i, _)) => &text[i + 1..],
        None => text,
    }
}

fn judgement_in_line(line: &str) -> Option<CorrectnessLabel> {
    let lower = line.to_lowercase().replace("not found", "not_found");
    let start = JUDGEMENT_MARKERS
        .iter()
        .filter_map(|m| lower.rfind(m).map(|i| i + m.len()))
        .max()?;
    let value = lower[start..]
        .split(|c: char| c.is_whitespace() || "`*<>\"'.,;:".contains(c))
        .find(|t| !t.is_empty())?;
    match value {
        "correct" => Some(CorrectnessLabel::Correct),
        "wrong" | "incorrect" => Some(CorrectnessLabel::Wrong),
        "not_found" => Some(CorrectnessLabel::NoAnswer),
        _ => None,
    }
}

/// Label from the last parsable `Judgement:` line of a judge reply.
pub fn parse_judgement(reply: &str) -> Option<CorrectnessLabel> {
    reply.lines().rev().find_map(judgement_in_line)
}

/// Asks the judge whether `response` matches `reference`.
///
/// Only the last [`VERIFY_TAIL_LINES`] lines of the response are sent. A reply
/// without a parsable judgement is retried once; failures map to `NoAnswer`.
pub fn model_verify<C: CompletionClient + ?Sized>(response: &str, reference: &str, client: &C) -> CorrectnessLabel {
    let prompt = Template::ModelVerify
        .fill(&[("out", last_lines(response, VERIFY_TAIL_LINES)), ("ref", reference)])
        .expect("verify template placeholders");
    let request = CompletionRequest::new(prompt, 0.0, VERIFY_MAX_TOKENS);
    for attempt in 0..2 {
        match client.complete(&request) {
            Ok(reply) => {
                if let Some(label) = parse_judgement(&reply) {
                    return label;
                }
                tracing::warn!(attempt, "judge reply has no parsable judgement");
            }
            Err(e) => {
                tracing::warn!(attempt, error = %e, "judge request failed");
                break;
            }
        }
    }
    CorrectnessLabel::NoAnswer
}

/// Asks the model for a short boxed answer; an empty box or no box gives `None`.
pub fn llm_extract_answer<C: CompletionClient + ?Sized>(problem: &str, solution: &str, client: &C) -> Option<String> {
    let prompt = Template::ExtractAnswer
        .fill(&[("Problem", problem), ("Solution", solution)])
        .expect("extract template placeholders");
    let reply = match client.complete(&CompletionRequest::new(prompt, 0.0, EXTRACT_MAX_TOKENS)) {
        Ok(r) => r,
        Err(e) => {
            tracing::warn!(error = %e, "extraction request failed");
            return None;
        }
    };
    let answer = extract_last_boxed(&reply)?.trim();
    (!answer.is_empty()).then(|| answer.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orchestrator::MockClient;

    #[test]
    fn tail_keeps_last_lines() {
        assert_eq!(last_lines("a\nb\nc", 2), "b\nc");
        assert_eq!(last_lines("a\nb\nc", 5), "a\nb\nc");
        assert_eq!(last_lines("a\nb\n", 1), "");
        let long: String = (0..30).map(|i| format!("l{i}\n")).collect();
        assert_eq!(last_lines(long.trim_end(), 20).lines().count(), 20);
        assert!(last_lines(long.trim_end(), 20).starts_with("l10\n"));
    }

    #[test]
    fn judgement_parsing() {
        assert_eq!(parse_judgement("thinking...\nJudgement: correct"), Some(CorrectnessLabel::Correct));
        assert_eq!(
            parse_judgement("Judgement: correct\nOn reflection\nJudgement: wrong"),
            Some(CorrectnessLabel::Wrong)
        );
        assert_eq!(parse_judgement("`Judgement: not_found`"), Some(CorrectnessLabel::NoAnswer));
        assert_eq!(parse_judgement("**Judgement:** Correct."), Some(CorrectnessLabel::Correct));
        assert_eq!(parse_judgement("Judgement: <correct/wrong/not_found>"), None);
        assert_eq!(parse_judgement("looks fine"), None);
    }

    #[test]
    fn verify_with_mock() {
        let mock = MockClient::new(["step by step...\nJudgement: correct"]);
        assert_eq!(model_verify("x = 3", "3", &mock), CorrectnessLabel::Correct);
        let prompt = &mock.requests()[0].prompt;
        assert!(prompt.contains("...\nx = 3\n\nReference solution:\n3\n"));

        let mock = MockClient::new(["no verdict here", "still nothing"]);
        assert_eq!(model_verify("x", "y", &mock), CorrectnessLabel::NoAnswer);
        assert_eq!(mock.requests().len(), 2);

        let mock = MockClient::new(["no verdict here"]);
        assert_eq!(model_verify("x", "y", &mock), CorrectnessLabel::NoAnswer);
    }

    #[test]
    fn extraction_with_mock() {
        let mock = MockClient::new([
            "The final answer is $\\boxed{42}$",
            "The final answer is $$\n\\boxed{}\n$$",
            "I cannot say",
        ]);
        assert_eq!(llm_extract_answer("p", "s", &mock).as_deref(), Some("42"));
        assert_eq!(llm_extract_answer("p", "s", &mock), None);
        assert_eq!(llm_extract_answer("p", "s", &mock), None);
        let req = &mock.requests()[0];
        assert_eq!(req.temperature, 0.0);
        assert_eq!(req.max_tokens, 512);
    }
}
