use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable holding the completion endpoint URL.
pub const ENDPOINT_ENV: &str = "COTFORGE_LLM_ENDPOINT";
/// Environment variable holding the bearer token, if any.
pub const TOKEN_ENV: &str = "COTFORGE_LLM_TOKEN";

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("mock script exhausted after {0} replies")]
    ScriptExhausted(usize),
    #[error("mock script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error("{ENDPOINT_ENV} is not set")]
    NoEndpoint,
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed endpoint reply: {0}")]
    Reply(String),
}

/// Single prompt in, text out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, temperature: f64, max_tokens: u32) -> Self {
        Self {
            prompt: prompt.into(),
            temperature,
            max_tokens,
        }
    }
}

pub trait CompletionClient: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ClientError>;
}

impl<C: CompletionClient + ?Sized> CompletionClient for &C {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ClientError> {
        (**self).complete(request)
    }
}

/// Replays canned replies in order and records every request.
#[derive(Debug, Default)]
pub struct MockClient {
    replies: Mutex<VecDeque<String>>,
    served: Mutex<Vec<CompletionRequest>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptLine {
    reply: String,
}

impl MockClient {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
            served: Mutex::new(Vec::new()),
        }
    }

    /// Parses a JSONL script of `{"reply": "..."}` lines. Blank lines are skipped.
    pub fn from_script(script: &str) -> Result<Self, ClientError> {
        let mut replies = Vec::new();
        for (i, line) in script.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: ScriptLine = serde_json::from_str(line).map_err(|e| ClientError::Script {
                line: i + 1,
                message: e.to_string(),
            })?;
            replies.push(parsed.reply);
        }
        Ok(Self::new(replies))
    }

    /// Requests served so far, in order.
    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.served.lock().expect("mock lock").clone()
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().expect("mock lock").len()
    }
}

impl CompletionClient for MockClient {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ClientError> {
        let mut served = self.served.lock().expect("mock lock");
        let reply = self
            .replies
            .lock()
            .expect("mock lock")
            .pop_front()
            .ok_or(ClientError::ScriptExhausted(served.len()))?;
        served.push(request.clone());
        Ok(reply)
    }
}

/// Blocking JSON client.
///
/// Sends `{"prompt", "temperature", "max_tokens"}` and expects `{"text"}`.
/// Transport failures and 5xx replies are retried up to `retries` times.
pub struct HttpClient {
    endpoint: String,
    token: Option<String>,
    retries: u32,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct CompletionReply {
    text: String,
}

impl HttpClient {
    pub fn new(endpoint: impl Into<String>, token: Option<String>, timeout: Duration, retries: u32) -> Self {
        Self {
            endpoint: endpoint.into(),
            token,
            retries,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    /// Reads the endpoint and token from the environment.
    pub fn from_env(timeout: Duration, retries: u32) -> Result<Self, ClientError> {
        let endpoint = std::env::var(ENDPOINT_ENV).map_err(|_| ClientError::NoEndpoint)?;
        let token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
        Ok(Self::new(endpoint, token, timeout, retries))
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn attempt(&self, request: &CompletionRequest) -> Result<String, ClientError> {
        let mut call = self.agent.post(&self.endpoint).set("Content-Type", "application/json");
        if let Some(token) = &self.token {
            call = call.set("Authorization", &format!("Bearer {token}"));
        }
        match call.send_json(request) {
            Ok(resp) => resp
                .into_json::<CompletionReply>()
                .map(|r| r.text)
                .map_err(|e| ClientError::Reply(e.to_string())),
            Err(ureq::Error::Status(status, resp)) => Err(ClientError::Status {
                status,
                body: resp.into_string().unwrap_or_default(),
            }),
            Err(ureq::Error::Transport(t)) => Err(ClientError::Transport(t.to_string())),
        }
    }
}

impl std::fmt::Debug for HttpClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpClient")
            .field("endpoint", &self.endpoint)
            .field("token", &self.token.as_ref().map(|_| "<redacted>"))
            .field("retries", &self.retries)
            .finish()
    }
}

impl CompletionClient for HttpClient {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ClientError> {
        let mut attempt = 0;
        loop {
            match self.attempt(request) {
                Err(e @ (ClientError::Transport(_) | ClientError::Status { status: 500..=599, .. })) if attempt < self.retries => {
                    attempt += 1;
                    tracing::warn!(attempt, error = %e, "completion request failed, retrying");
                }
                other => return other,
            }
        }
    }
}
