//! Out-of-process embedding and generation over HTTP/JSON.
//!
//! `POST {endpoint}/embed` takes `{"texts": [...]}` and answers
//! `{"vectors": [[...]...], "dim": n}`; `POST {endpoint}/generate` takes
//! `{"parts": [...]}` and answers `{"summary": "..."}`. Failures are non-2xx
//! statuses with `{"error": "..."}`.

use std::thread;
use std::time::Duration;

use kas_core::assembly::{AssemblyError, Generator, GeneratorInput};
use kas_core::embedding::{EmbedError, EmbeddingProvider, EmbeddingVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Extra attempts after the first.
    pub retries: u32,
    /// Delay before the first retry; doubles on each further one.
    pub backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { retries: 3, backoff: Duration::from_millis(200) }
    }
}

#[derive(Debug)]
enum CallError {
    /// Worth retrying: connection failures, 429 and 5xx.
    Transient(String),
    Fatal(String),
}

struct Client {
    agent: ureq::Agent,
    base: String,
    retry: RetryPolicy,
}

const BODY_LIMIT: u64 = 1 << 30;

impl Client {
    fn new(endpoint: &str, retry: RetryPolicy, timeout: Duration) -> Self {
        let agent: ureq::Agent =
            ureq::Agent::config_builder().http_status_as_error(false).timeout_global(Some(timeout)).build().into();
        Self { agent, base: endpoint.trim_end_matches('/').to_string(), retry }
    }

    fn call_once(&self, url: &str, body: &str) -> Result<String, CallError> {
        let mut resp = self
            .agent
            .post(url)
            .header("content-type", "application/json")
            .send(body)
            .map_err(|e| CallError::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .with_config()
            .limit(BODY_LIMIT)
            .read_to_string()
            .map_err(|e| CallError::Transient(e.to_string()))?;
        if (200..300).contains(&status) {
            return Ok(text);
        }
        #[derive(Deserialize)]
        struct ErrorBody {
            error: String,
        }
        let detail = serde_json::from_str::<ErrorBody>(&text).map(|b| b.error).unwrap_or(text);
        let msg = format!("{url} returned {status}: {detail}");
        if status == 429 || status >= 500 {
            Err(CallError::Transient(msg))
        } else {
            Err(CallError::Fatal(msg))
        }
    }

    /// Posts `body` to `{base}/{route}`, retrying transient failures.
    fn post(&self, route: &str, body: &str) -> Result<String, String> {
        let url = format!("{}/{route}", self.base);
        let mut delay = self.retry.backoff;
        let mut attempt = 0;
        loop {
            match self.call_once(&url, body) {
                Ok(text) => return Ok(text),
                Err(CallError::Fatal(msg)) => return Err(msg),
                Err(CallError::Transient(msg)) if attempt >= self.retry.retries => {
                    return Err(format!("{msg} (after {} attempts)", attempt + 1));
                }
                Err(CallError::Transient(_)) => {
                    thread::sleep(delay);
                    delay = delay.saturating_mul(2);
                    attempt += 1;
                }
            }
        }
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
    dim: usize,
}

pub struct HttpEmbeddingProvider {
    client: Client,
    dim: usize,
    batch_size: usize,
}

impl HttpEmbeddingProvider {
    /// # Panics
    /// If `dim` or `batch_size` is zero.
    pub fn new(endpoint: &str, dim: usize, batch_size: usize, retry: RetryPolicy) -> Self {
        assert!(dim >= 1 && batch_size >= 1, "dim and batch_size must be positive");
        Self { client: Client::new(endpoint, retry, Duration::from_secs(300)), dim, batch_size }
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let body = serde_json::to_string(&EmbedRequest { texts }).map_err(|e| EmbedError::Protocol(e.to_string()))?;
        let text = self.client.post("embed", &body).map_err(EmbedError::Transport)?;
        let resp: EmbedResponse =
            serde_json::from_str(&text).map_err(|e| EmbedError::Protocol(format!("bad /embed response: {e}")))?;
        if resp.vectors.len() != texts.len() {
            return Err(EmbedError::Protocol(format!(
                "service returned {} vectors for {} texts",
                resp.vectors.len(),
                texts.len()
            )));
        }
        if resp.dim != self.dim {
            return Err(EmbedError::Protocol(format!("service reports dim {}, expected {}", resp.dim, self.dim)));
        }
        resp.vectors
            .into_iter()
            .map(|v| {
                if v.len() != self.dim {
                    return Err(EmbedError::Protocol(format!(
                        "service returned a {}-dimensional vector, expected {}",
                        v.len(),
                        self.dim
                    )));
                }
                EmbeddingVector::new(v).map_err(|e| EmbedError::Protocol(e.to_string()))
            })
            .collect()
    }
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.batch_size) {
            out.extend(self.embed_batch(batch)?);
        }
        Ok(out)
    }
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    parts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct GenerateResponse {
    summary: String,
}

pub struct HttpGenerator {
    client: Client,
}

impl HttpGenerator {
    pub fn new(endpoint: &str, retry: RetryPolicy) -> Self {
        Self { client: Client::new(endpoint, retry, Duration::from_secs(600)) }
    }
}

impl Generator for HttpGenerator {
    fn name(&self) -> &str {
        "http"
    }

    fn generate(&self, input: &GeneratorInput) -> Result<String, AssemblyError> {
        let fail = |message: String| AssemblyError::Generator { name: "http".into(), message };
        let body = serde_json::to_string(&GenerateRequest { parts: input.rendered_parts().collect() })
            .map_err(|e| fail(e.to_string()))?;
        let text = self.client.post("generate", &body).map_err(|e| fail(format!("query {}: {e}", input.query_id)))?;
        let resp: GenerateResponse =
            serde_json::from_str(&text).map_err(|e| fail(format!("bad /generate response: {e}")))?;
        Ok(resp.summary)
    }
}
