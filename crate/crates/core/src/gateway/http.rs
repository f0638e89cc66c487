use std::time::{Duration, Instant};

use serde_json::{json, Value as Json};

use super::{
    ChatModel, ChatRequest, ConfigError, GatewayError, ModelConfig, RawModelOutput, Secret, Usage,
};

/// OpenAI-compatible `/chat/completions` client.
pub struct HttpChatModel {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<Secret>,
}

impl HttpChatModel {
    pub fn new(config: &ModelConfig) -> Result<HttpChatModel, ConfigError> {
        let base = config.base_url.trim().trim_end_matches('/');
        if base.is_empty() {
            return Err(ConfigError(format!(
                "no base_url configured and {} is not set",
                super::BASE_URL_ENV
            )));
        }
        if !(base.starts_with("http://") || base.starts_with("https://")) {
            return Err(ConfigError(format!(
                "base_url must be an http(s) URL, got '{base}'"
            )));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpChatModel {
            agent,
            endpoint: format!("{base}/chat/completions"),
            api_key: config.api_key.clone(),
        })
    }
}

impl ChatModel for HttpChatModel {
    fn complete(&self, request: &ChatRequest) -> Result<RawModelOutput, GatewayError> {
        let body = json!({
            "model": request.model,
            "messages": request.messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let started = Instant::now();
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {}", key.expose()));
        }
        let response = req
            .send_json(&body)
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .into_body()
            .read_to_string()
            .map_err(|e| GatewayError::Transport(format!("reading response body: {e}")))?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(GatewayError::Auth(format!("status {status}: {text}"))),
            _ => return Err(GatewayError::Endpoint { status, body: text }),
        }
        let parsed: Json = serde_json::from_str(&text).map_err(|e| GatewayError::Endpoint {
            status,
            body: format!("malformed response ({e}): {text}"),
        })?;
        let content = parsed["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| GatewayError::Endpoint {
                status,
                body: format!("response has no message content: {text}"),
            })?;
        let usage = Usage {
            prompt_tokens: parsed["usage"]["prompt_tokens"].as_u64().unwrap_or(0),
            completion_tokens: parsed["usage"]["completion_tokens"].as_u64().unwrap_or(0),
        };
        Ok(RawModelOutput {
            text: content.to_string(),
            usage,
            latency: started.elapsed(),
        })
    }
}
