use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{hex, ChatModel, ChatRequest, GatewayError, PromptKind, RawModelOutput, Usage};

/// Identity of a request for replay: prompt kind plus rendered messages.
pub fn request_key(request: &ChatRequest) -> String {
    let mut h = Sha256::new();
    h.update(request.kind.name().as_bytes());
    for m in &request.messages {
        h.update(b"\n");
        h.update(m.role.as_bytes());
        h.update(b"\n");
        h.update(m.content.as_bytes());
    }
    hex(&h.finalize())
}

#[derive(Debug, Serialize, Deserialize)]
struct Line {
    key: String,
    kind: PromptKind,
    text: String,
}

/// Passes requests to an inner model and appends each reply to a transcript.
pub struct Recorder {
    inner: Box<dyn ChatModel>,
    out: Mutex<File>,
}

impl Recorder {
    pub fn new(inner: impl ChatModel + 'static, path: &Path) -> std::io::Result<Recorder> {
        let out = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Recorder {
            inner: Box::new(inner),
            out: Mutex::new(out),
        })
    }
}

impl ChatModel for Recorder {
    fn complete(&self, request: &ChatRequest) -> Result<RawModelOutput, GatewayError> {
        let out = self.inner.complete(request)?;
        let line = Line {
            key: request_key(request),
            kind: request.kind,
            text: out.text.clone(),
        };
        let mut json = serde_json::to_string(&line).expect("line serializes");
        json.push('\n');
        let mut f = self.out.lock().unwrap_or_else(|p| p.into_inner());
        f.write_all(json.as_bytes())
            .map_err(|e| GatewayError::Transport(format!("transcript write failed: {e}")))?;
        Ok(out)
    }
}

/// Serves replies from a recorded transcript. A request seen several times
/// gets its recorded replies in order, then the last one again.
pub struct Replayer {
    replies: Mutex<HashMap<String, (Vec<String>, usize)>>,
}

impl Replayer {
    pub fn open(path: &Path) -> std::io::Result<Replayer> {
        let mut replies: HashMap<String, (Vec<String>, usize)> = HashMap::new();
        for (n, line) in BufReader::new(File::open(path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Line = serde_json::from_str(&line).map_err(|e| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("transcript line {}: {e}", n + 1),
                )
            })?;
            replies.entry(rec.key).or_default().0.push(rec.text);
        }
        Ok(Replayer {
            replies: Mutex::new(replies),
        })
    }
}

impl ChatModel for Replayer {
    fn complete(&self, request: &ChatRequest) -> Result<RawModelOutput, GatewayError> {
        let key = request_key(request);
        let mut map = self.replies.lock().unwrap_or_else(|p| p.into_inner());
        let Some((texts, next)) = map.get_mut(&key) else {
            return Err(GatewayError::Replay {
                kind: request.kind,
                key,
            });
        };
        let text = texts[(*next).min(texts.len() - 1)].clone();
        *next += 1;
        Ok(RawModelOutput {
            text,
            usage: Usage::default(),
            latency: Duration::ZERO,
        })
    }
}
