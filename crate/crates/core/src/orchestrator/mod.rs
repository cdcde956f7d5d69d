//! LLM-backed components behind a generic completion client.
//!
//! - [`model_verify`] asks a model to judge a response against a reference.
//! - [`llm_extract_answer`] asks a model for a short boxed answer.
//! - [`run_action_machine`] sequences the clarify / decompose / solution step /
//!   reflection / answer prompts into an append-only chain of thought.
//!
//! Every component talks to a [`CompletionClient`]. [`MockClient`] replays a
//! script and never touches the network; [`HttpClient`] posts to a configured
//! endpoint.

mod actions;
mod client;
mod template;
mod verify;

pub use actions::{
    parse_action_reply, run_action_machine, run_action_machine_with, ActionClients, ActionError, ActionKind, ActionState, ChainOfThought,
    ParsedReply, Thought, DEFAULT_ANSWER_FORMAT,
};
pub use client::{ClientError, CompletionClient, CompletionRequest, HttpClient, MockClient, ENDPOINT_ENV, TOKEN_ENV};
pub use template::{fill, Template, TemplateError};
pub use verify::{last_lines, llm_extract_answer, model_verify, parse_judgement, VERIFY_TAIL_LINES};
