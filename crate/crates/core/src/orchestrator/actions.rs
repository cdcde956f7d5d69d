use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::client::{ClientError, CompletionClient, CompletionRequest};
use super::template::Template;
use crate::verifier::extract_last_boxed;

/// Value of `{format}` in the answer prompt.
pub const DEFAULT_ANSWER_FORMAT: &str = "Write the final answer inside \\boxed{}.";

const ACTION_TEMPERATURE: f64 = 0.0;
const ACTION_MAX_TOKENS: u32 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Clarify,
    Decompose,
    SolutionStep,
    Reflection,
    Answer,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Clarify => "clarify",
            ActionKind::Decompose => "decompose",
            ActionKind::SolutionStep => "solution_step",
            ActionKind::Reflection => "reflection",
            ActionKind::Answer => "answer",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().replace([' ', '-'], "_").as_str() {
            "clarify" => Some(ActionKind::Clarify),
            "decompose" => Some(ActionKind::Decompose),
            "solution_step" => Some(ActionKind::SolutionStep),
            "reflection" | "reflect" => Some(ActionKind::Reflection),
            "answer" => Some(ActionKind::Answer),
            _ => None,
        }
    }

    fn template(self) -> Template {
        match self {
            ActionKind::Clarify => Template::Clarify,
            ActionKind::Decompose => Template::Decompose,
            ActionKind::SolutionStep => Template::SolutionStep,
            ActionKind::Reflection => Template::Reflection,
            ActionKind::Answer => Template::Answer,
        }
    }
}

/// One accepted entry of the chain of thought.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thought {
    pub action: ActionKind,
    pub text: String,
    /// Decompose candidates that were not followed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<String>,
    /// Set when the answer was forced by the step cap or a parse failure.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub forced: bool,
}

/// Append-only log produced by the action machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOfThought {
    pub prompt: String,
    thoughts: Vec<Thought>,
    pub answer: Option<String>,
}

impl ChainOfThought {
    fn new(prompt: &str) -> Self {
        Self {
            prompt: prompt.to_string(),
            thoughts: Vec::new(),
            answer: None,
        }
    }

    pub fn thoughts(&self) -> &[Thought] {
        &self.thoughts
    }

    pub fn len(&self) -> usize {
        self.thoughts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thoughts.is_empty()
    }

    /// True once the last entry is an answer.
    pub fn is_terminal(&self) -> bool {
        self.thoughts.last().is_some_and(|t| t.action == ActionKind::Answer)
    }

    fn push(&mut self, thought: Thought) {
        self.thoughts.push(thought);
    }

    /// Thought texts joined as one running solution.
    pub fn transcript(&self) -> String {
        self.thoughts.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join("\n\n")
    }
}

/// Machine state between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionState {
    pub current: ActionKind,
    pub log: ChainOfThought,
    /// Goal stack; the bottom entry is the whole problem.
    pub goals: Vec<String>,
    /// Subgoals already achieved, shown to the reflection prompt.
    pub finished_goals: Vec<String>,
}

impl ActionState {
    pub fn new(problem: &str) -> Self {
        Self {
            current: ActionKind::Clarify,
            log: ChainOfThought::new(problem),
            goals: vec![problem.to_string()],
            finished_goals: Vec::new(),
        }
    }

    pub fn current_goal(&self) -> &str {
        self.goals.last().map(String::as_str).unwrap_or_default()
    }

    pub fn parent_goal(&self) -> &str {
        let n = self.goals.len();
        if n >= 2 {
            &self.goals[n - 2]
        } else {
            self.current_goal()
        }
    }

    fn prior_step(&self) -> &str {
        self.log
            .thoughts
            .iter()
            .rev()
            .find(|t| t.action == ActionKind::SolutionStep)
            .map(|t| t.text.as_str())
            .unwrap_or_default()
    }

    fn goal_tree(&self) -> String {
        self.finished_goals.iter().map(|g| format!("- DONE: {g}")).collect::<Vec<_>>().join("\n")
    }

    fn prompt(&self, action: ActionKind) -> String {
        let solution = self.log.transcript();
        let current = self.current_goal().to_string();
        let parent = self.parent_goal().to_string();
        let tree = self.goal_tree();
        let prior = self.prior_step().to_string();
        let values: Vec<(&str, &str)> = match action {
            ActionKind::Clarify => vec![("goal", &self.log.prompt)],
            ActionKind::Decompose => vec![("current_goal", &current), ("parent_goal", &parent), ("solution", &solution)],
            ActionKind::SolutionStep => vec![("current_goal", &current), ("solution", &solution), ("prior_step", &prior)],
            ActionKind::Reflection => vec![
                ("current_goal", &current),
                ("parent_goal", &parent),
                ("solution", &solution),
                ("parent_goal.target", &parent),
                ("parent_goal_tree", &tree),
            ],
            ActionKind::Answer => vec![("solution", &solution), ("format", DEFAULT_ANSWER_FORMAT)],
        };
        action.template().fill(&values).expect("action template placeholders")
    }
}

/// Fields pulled out of one action reply.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedReply {
    /// Explicit `<next_action>` request, if the reply made one.
    pub next: Option<ActionKind>,
    pub thought: String,
    pub goal: Option<String>,
    pub alternatives: Vec<String>,
    pub current_goal_achieved: Option<bool>,
    pub parent_goal_achieved: Option<bool>,
    pub new_goal: Option<String>,
    pub answer: Option<String>,
}

fn tags<'a>(text: &'a str, name: &str) -> Vec<&'a str> {
    let open = format!("<{name}>");
    let close = format!("</{name}>");
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find(&open) {
        let body = &rest[start + open.len()..];
        match body.find(&close) {
            Some(end) => {
                out.push(body[..end].trim());
                rest = &body[end + close.len()..];
            }
            None => break,
        }
    }
    out
}

fn tag<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    tags(text, name).into_iter().next()
}

fn flag(text: &str, name: &str) -> Option<bool> {
    match tag(text, name)?.to_ascii_lowercase().as_str() {
        "true" | "yes" => Some(true),
        "false" | "no" => Some(false),
        _ => None,
    }
}

/// Parses a reply to the `action` prompt.
///
/// A `<next_action>` tag, when present, must name one of the five actions;
/// otherwise the reply is rejected with the offending token.
pub fn parse_action_reply(action: ActionKind, reply: &str) -> Result<ParsedReply, String> {
    let next = match tag(reply, "next_action") {
        Some(token) => Some(ActionKind::from_token(token).ok_or_else(|| token.to_string())?),
        None => None,
    };
    let whole = reply.trim().to_string();
    let mut parsed = ParsedReply {
        next,
        ..ParsedReply::default()
    };
    match action {
        ActionKind::Clarify => {
            parsed.thought = tag(reply, "clarification").map_or(whole, str::to_string);
            parsed.goal = tag(reply, "goal").filter(|g| !g.is_empty()).map(str::to_string);
        }
        ActionKind::Decompose => {
            let mut sentences = tags(reply, "sentence").into_iter().filter(|s| !s.is_empty());
            match sentences.next() {
                Some(first) => {
                    parsed.thought = first.to_string();
                    parsed.alternatives = sentences.map(str::to_string).collect();
                }
                None => parsed.thought = whole,
            }
        }
        ActionKind::SolutionStep => parsed.thought = whole,
        ActionKind::Reflection => {
            parsed.thought = tag(reply, "verification").map_or(whole, str::to_string);
            parsed.current_goal_achieved = flag(reply, "current_goal_achieved");
            parsed.parent_goal_achieved = flag(reply, "parent_goal_achieved");
            parsed.new_goal = tag(reply, "new_goal").filter(|g| !g.is_empty()).map(str::to_string);
        }
        ActionKind::Answer => {
            parsed.answer = extract_last_boxed(reply).map(|a| a.trim().to_string());
            parsed.thought = whole;
        }
    }
    Ok(parsed)
}

/// Completion clients per action. Reflection may use a stronger model.
pub struct ActionClients<'a> {
    pub default: &'a dyn CompletionClient,
    pub reflection: Option<&'a dyn CompletionClient>,
}

impl<'a> ActionClients<'a> {
    pub fn single(client: &'a dyn CompletionClient) -> Self {
        Self {
            default: client,
            reflection: None,
        }
    }

    fn for_action(&self, action: ActionKind) -> &'a dyn CompletionClient {
        match (action, self.reflection) {
            (ActionKind::Reflection, Some(c)) => c,
            _ => self.default,
        }
    }
}

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("max_steps must be at least 1")]
    ZeroSteps,
    #[error(transparent)]
    Client(#[from] ClientError),
}

fn default_next(state: &ActionState, action: ActionKind, parsed: &ParsedReply) -> ActionKind {
    match action {
        ActionKind::Clarify => ActionKind::Decompose,
        ActionKind::Decompose => ActionKind::SolutionStep,
        ActionKind::SolutionStep => ActionKind::Reflection,
        ActionKind::Reflection => {
            if parsed.parent_goal_achieved == Some(true) || (parsed.current_goal_achieved == Some(true) && state.goals.len() <= 1) {
                ActionKind::Answer
            } else if parsed.current_goal_achieved == Some(true) {
                ActionKind::Decompose
            } else {
                ActionKind::SolutionStep
            }
        }
        ActionKind::Answer => ActionKind::Answer,
    }
}

fn apply(state: &mut ActionState, action: ActionKind, parsed: ParsedReply, forced: bool) {
    let next = parsed.next.unwrap_or_else(|| default_next(state, action, &parsed));
    match action {
        ActionKind::Clarify => {
            if let Some(goal) = &parsed.goal {
                state.goals[0] = goal.clone();
            }
        }
        ActionKind::Decompose => {
            if !parsed.alternatives.is_empty() {
                tracing::debug!(alternatives = parsed.alternatives.len(), "following the first decompose candidate");
            }
            state.goals.push(parsed.thought.clone());
        }
        ActionKind::Reflection => {
            if parsed.current_goal_achieved == Some(true) {
                if state.goals.len() > 1 {
                    let done = state.goals.pop().unwrap_or_default();
                    state.finished_goals.push(done);
                }
            } else if let Some(goal) = &parsed.new_goal {
                if let Some(top) = state.goals.last_mut() {
                    *top = goal.clone();
                }
            }
        }
        ActionKind::SolutionStep => {}
        ActionKind::Answer => state.log.answer = parsed.answer.clone(),
    }
    state.log.push(Thought {
        action,
        text: parsed.thought,
        alternatives: parsed.alternatives,
        forced,
    });
    state.current = next;
}

/// Runs the action machine with one client for every action.
pub fn run_action_machine(problem: &str, client: &dyn CompletionClient, max_steps: usize) -> Result<ChainOfThought, ActionError> {
    run_action_machine_with(problem, &ActionClients::single(client), max_steps)
}

/// Runs the action machine until an answer is logged.
///
/// Each step fills the current action's template, sends it, and appends the
/// parsed thought. The reply may pick the next action with a
/// `<next_action>` tag; otherwise clarify, decompose, solution step and
/// reflection follow each other, and reflection routes on its achieved flags.
/// A reply naming an unknown action is retried once and then replaced by a
/// forced answer. The step that would reach `max_steps` thoughts is always an
/// answer.
pub fn run_action_machine_with(problem: &str, clients: &ActionClients<'_>, max_steps: usize) -> Result<ChainOfThought, ActionError> {
    if max_steps == 0 {
        return Err(ActionError::ZeroSteps);
    }
    let mut state = ActionState::new(problem);
    while !state.log.is_terminal() {
        let at_cap = state.log.len() + 1 >= max_steps;
        let action = if at_cap { ActionKind::Answer } else { state.current };
        let forced = at_cap && state.current != ActionKind::Answer;
        let request = CompletionRequest::new(state.prompt(action), ACTION_TEMPERATURE, ACTION_MAX_TOKENS);
        let client = clients.for_action(action);

        let mut parsed = None;
        for attempt in 0..2 {
            let reply = client.complete(&request)?;
            match parse_action_reply(action, &reply) {
                Ok(p) => {
                    parsed = Some(p);
                    break;
                }
                Err(token) => tracing::warn!(attempt, action = action.as_str(), token, "unknown next action"),
            }
        }
        match parsed {
            Some(p) => apply(&mut state, action, p, forced),
            None => {
                let request = CompletionRequest::new(state.prompt(ActionKind::Answer), ACTION_TEMPERATURE, ACTION_MAX_TOKENS);
                let reply = clients.for_action(ActionKind::Answer).complete(&request)?;
                let mut p = parse_action_reply(ActionKind::Answer, &reply).unwrap_or_else(|_| ParsedReply {
                    thought: reply.trim().to_string(),
                    answer: extract_last_boxed(&reply).map(|a| a.trim().to_string()),
                    ..ParsedReply::default()
                });
                p.next = None;
                apply(&mut state, ActionKind::Answer, p, true);
            }
        }
    }
    Ok(state.log)
}
