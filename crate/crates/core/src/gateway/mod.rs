//! Chat-completion access: prompt templates, retries, rate limits, audit log
//! and payload extraction.

mod extract;
mod http;
mod limit;
mod perturb;
mod prompts;
pub mod stub;
mod transcript;

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use extract::{extract_payload, ExtractError};
pub use http::HttpChatModel;
pub use perturb::{perturb_statement, Perturbation};
pub use prompts::{render_prompt, PromptKind, Slot, Slots};
pub use transcript::{request_key, Recorder, Replayer};

use limit::{Semaphore, TokenBucket};

pub const API_KEY_ENV: &str = "MODEL_API_KEY";
pub const BASE_URL_ENV: &str = "MODEL_BASE_URL";

/// An API key. Never printed.
#[derive(Clone, PartialEq, Eq)]
pub struct Secret(String);

impl Secret {
    pub fn new(s: impl Into<String>) -> Secret {
        Secret(s.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret(***)")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Base URL of an OpenAI-compatible API, e.g. `http://host/v1`. Empty
    /// means "take it from `MODEL_BASE_URL`".
    pub base_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: f64,
    pub max_retries: u32,
    /// First retry delay; doubles on every further retry.
    pub backoff_ms: u64,
    pub max_in_flight: usize,
    /// Token-bucket rate; `None` disables rate limiting.
    pub requests_per_second: Option<f64>,
    #[serde(skip)]
    pub api_key: Option<Secret>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            base_url: String::new(),
            model_name: "deepseek-chat".to_string(),
            temperature: 0.0,
            max_tokens: 512,
            timeout_secs: 60.0,
            max_retries: 3,
            backoff_ms: 500,
            max_in_flight: 8,
            requests_per_second: None,
            api_key: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid model config: {0}")]
pub struct ConfigError(pub String);

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(ConfigError(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(ConfigError(format!(
                "timeout_secs must be > 0, got {}",
                self.timeout_secs
            )));
        }
        if self.max_in_flight == 0 {
            return Err(ConfigError("max_in_flight must be at least 1".into()));
        }
        if let Some(r) = self.requests_per_second {
            if !(r.is_finite() && r > 0.0) {
                return Err(ConfigError(format!(
                    "requests_per_second must be > 0, got {r}"
                )));
            }
        }
        if self.model_name.trim().is_empty() {
            return Err(ConfigError("model_name is empty".into()));
        }
        Ok(())
    }

    /// Fills the API key from the environment, and the base URL when the
    /// config leaves it empty.
    pub fn with_env(mut self) -> ModelConfig {
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            if !key.is_empty() {
                self.api_key = Some(Secret(key));
            }
        }
        if self.base_url.is_empty() {
            if let Ok(url) = std::env::var(BASE_URL_ENV) {
                self.base_url = url;
            }
        }
        self
    }

    /// Stable hash of every setting except the secret.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

/// Everything a model backend sees. Construction is deterministic in
/// (kind, slots, config).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub kind: PromptKind,
    pub slots: Slots,
    pub messages: Vec<Message>,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawModelOutput {
    /// Completion text exactly as received.
    pub text: String,
    pub usage: Usage,
    pub latency: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GatewayError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("endpoint returned status {status}: {body}")]
    Endpoint { status: u16, body: String },
    #[error("prompt {kind} is missing slot '{slot}'")]
    MissingSlot { kind: PromptKind, slot: Slot },
    #[error("could not extract payload: {0}")]
    Extract(#[from] ExtractError),
    #[error("no recorded response for {kind} request {key}")]
    Replay { kind: PromptKind, key: String },
    #[error("perturbation rejected: {0}")]
    PerturbRejected(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl GatewayError {
    fn is_retryable(&self) -> bool {
        match self {
            GatewayError::Transport(_) => true,
            GatewayError::Endpoint { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

/// A chat-completion backend.
pub trait ChatModel: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<RawModelOutput, GatewayError>;
}

impl<M: ChatModel + ?Sized> ChatModel for Box<M> {
    fn complete(&self, request: &ChatRequest) -> Result<RawModelOutput, GatewayError> {
        (**self).complete(request)
    }
}

impl<M: ChatModel + ?Sized> ChatModel for std::sync::Arc<M> {
    fn complete(&self, request: &ChatRequest) -> Result<RawModelOutput, GatewayError> {
        (**self).complete(request)
    }
}

#[derive(Serialize)]
struct AuditRecord<'a> {
    ts_ms: u128,
    kind: PromptKind,
    attempt: u32,
    request: &'a ChatRequest,
    response: Option<&'a RawModelOutput>,
    error: Option<String>,
}

/// Shared entry point for every model call. Safe to use from many threads.
pub struct Gateway {
    model: Box<dyn ChatModel>,
    config: ModelConfig,
    in_flight: Semaphore,
    bucket: Option<TokenBucket>,
    audit: Option<Mutex<BufWriter<File>>>,
    calls: AtomicUsize,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn new(
        model: impl ChatModel + 'static,
        config: ModelConfig,
    ) -> Result<Gateway, ConfigError> {
        config.validate()?;
        Ok(Gateway {
            model: Box::new(model),
            in_flight: Semaphore::new(config.max_in_flight),
            bucket: config.requests_per_second.map(TokenBucket::new),
            config,
            audit: None,
            calls: AtomicUsize::new(0),
        })
    }

    /// Appends every request and response to a JSON-lines file.
    pub fn with_audit_log(mut self, path: &Path) -> std::io::Result<Gateway> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        self.audit = Some(Mutex::new(BufWriter::new(file)));
        Ok(self)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Model round trips made so far, retries included.
    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn request(&self, kind: PromptKind, slots: &Slots) -> Result<ChatRequest, GatewayError> {
        let content =
            render_prompt(kind, slots).map_err(|slot| GatewayError::MissingSlot { kind, slot })?;
        Ok(ChatRequest {
            kind,
            slots: slots.clone(),
            messages: vec![Message {
                role: "user".to_string(),
                content,
            }],
            model: self.config.model_name.clone(),
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
        })
    }

    pub fn complete(
        &self,
        kind: PromptKind,
        slots: &Slots,
    ) -> Result<RawModelOutput, GatewayError> {
        let request = self.request(kind, slots)?;
        let mut attempt = 0;
        loop {
            let result = {
                let _permit = self.in_flight.acquire();
                if let Some(bucket) = &self.bucket {
                    bucket.take();
                }
                self.calls.fetch_add(1, Ordering::SeqCst);
                let started = Instant::now();
                self.model.complete(&request).map(|mut out| {
                    if out.latency.is_zero() {
                        out.latency = started.elapsed();
                    }
                    out
                })
            };
            self.log(&request, attempt, &result);
            match result {
                Err(e) if e.is_retryable() && attempt < self.config.max_retries => {
                    std::thread::sleep(Duration::from_millis(
                        self.config.backoff_ms.saturating_mul(1 << attempt.min(16)),
                    ));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    /// Completes and extracts the payload under the template's key.
    pub fn generate(&self, kind: PromptKind, slots: &Slots) -> Result<String, GatewayError> {
        let raw = self.complete(kind, slots)?;
        Ok(extract_payload(&raw.text, kind.payload_key())?)
    }

    fn log(
        &self,
        request: &ChatRequest,
        attempt: u32,
        result: &Result<RawModelOutput, GatewayError>,
    ) {
        let Some(audit) = &self.audit else { return };
        let record = AuditRecord {
            ts_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            kind: request.kind,
            attempt,
            request,
            response: result.as_ref().ok(),
            error: result.as_ref().err().map(ToString::to_string),
        };
        let mut w = audit.lock().unwrap_or_else(|p| p.into_inner());
        // the audit log is best effort and never fails a call
        let mut line = serde_json::to_vec(&record).unwrap_or_default();
        line.push(b'\n');
        let _ = w.write_all(&line).and_then(|()| w.flush());
    }
}
