//! In-process model backends for tests and offline runs.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use super::{ChatModel, ChatRequest, GatewayError, RawModelOutput, Usage};

fn output(text: String) -> RawModelOutput {
    RawModelOutput {
        text,
        usage: Usage::default(),
        latency: Duration::ZERO,
    }
}

/// Answers every request with a closure.
pub struct FnModel<F>(pub F);

impl<F> ChatModel for FnModel<F>
where
    F: Fn(&ChatRequest) -> Result<String, GatewayError> + Send + Sync,
{
    fn complete(&self, request: &ChatRequest) -> Result<RawModelOutput, GatewayError> {
        (self.0)(request).map(output)
    }
}

/// Replies with a fixed script in order. Once the script runs out it keeps
/// repeating the last reply, or fails with a transport error if it was empty.
pub struct ScriptedModel {
    replies: Mutex<(VecDeque<String>, Option<String>)>,
}

impl ScriptedModel {
    pub fn new<I, S>(replies: I) -> ScriptedModel
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedModel {
            replies: Mutex::new((replies.into_iter().map(Into::into).collect(), None)),
        }
    }

    pub fn repeating(reply: impl Into<String>) -> ScriptedModel {
        ScriptedModel::new([reply])
    }
}

impl ChatModel for ScriptedModel {
    fn complete(&self, _request: &ChatRequest) -> Result<RawModelOutput, GatewayError> {
        let mut guard = self.replies.lock().unwrap_or_else(|p| p.into_inner());
        let (queue, last) = &mut *guard;
        if let Some(next) = queue.pop_front() {
            *last = Some(next.clone());
            return Ok(output(next));
        }
        last.clone()
            .map(output)
            .ok_or_else(|| GatewayError::Transport("script is empty".into()))
    }
}

/// Wraps a query as the JSON payload a well-behaved model would return.
pub fn payload(key: &str, value: &str) -> String {
    serde_json::json!({ key: value }).to_string()
}
