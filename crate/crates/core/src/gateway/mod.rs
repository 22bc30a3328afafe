//! Completion backends: request digests, truncation, retries, rate
//! limiting, the on-disk response cache and the offline mock.

mod cache;
mod http;
mod mock;
mod tokens;

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cache::{CacheEntry, ResponseCache};
pub use http::{AdapterKind, HttpTransport, OpenAiAdapter, PlainAdapter, ResponseAdapter};
pub use mock::{MockEntry, MockFailure, MockTransport};
pub use tokens::{count_tokens, truncate_document, CounterRegistry, TokenCounter, WhitespaceCounter};

use crate::corpus::Document;
use crate::prompts::PromptBundle;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("backend unreachable after {attempts} attempt(s): {message}")]
    BackendUnreachable { attempts: u32, message: String },
    #[error("backend rejected the request with status {status}: {body}")]
    BackendRejected { status: u16, body: String },
    #[error("backend timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("unrecognized backend response: {0}")]
    BadResponse(String),
    #[error("unknown token counter {0:?}")]
    UnknownCounter(String),
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("invalid backend config: {0}")]
    InvalidConfig(String),
    #[error("cache error: {0}")]
    Cache(String),
}

impl GatewayError {
    /// Short machine-readable label for run records.
    pub fn kind(&self) -> &'static str {
        match self {
            GatewayError::BackendUnreachable { .. } => "backend_unreachable",
            GatewayError::BackendRejected { .. } => "backend_rejected",
            GatewayError::Timeout { .. } => "timeout",
            GatewayError::BadResponse(_) => "bad_response",
            GatewayError::UnknownCounter(_) => "unknown_counter",
            GatewayError::EmptyPrompt => "empty_prompt",
            GatewayError::InvalidConfig(_) => "invalid_config",
            GatewayError::Cache(_) => "cache",
        }
    }
}

/// Endpoint value that selects the offline mock transport.
pub const MOCK_ENDPOINT: &str = "mock";

fn default_budget() -> usize {
    2048
}
fn default_max_tokens() -> u32 {
    256
}
fn default_timeout() -> u64 {
    60
}
fn default_retries() -> u32 {
    2
}
fn default_counter() -> String {
    "whitespace".into()
}
fn default_key_env() -> String {
    "SUMCOT_API_KEY".into()
}
fn default_backoff() -> u64 {
    500
}
fn default_concurrency() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub name: String,
    /// HTTP(S) URL, or `mock`.
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default)]
    pub temperature: f64,
    /// Document token budget applied before prompting.
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_counter")]
    pub token_counter: String,
    #[serde(default)]
    pub adapter: AdapterKind,
    /// Name of the environment variable holding the API credential.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default)]
    pub min_interval_ms: u64,
    #[serde(default = "default_backoff")]
    pub retry_backoff_ms: u64,
    /// Maximum in-flight documents during a run.
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Fixture file for the mock endpoint.
    #[serde(default)]
    pub fixtures: Option<PathBuf>,
    /// Response caching; defaults to on for HTTP and off for the mock.
    #[serde(default)]
    pub cache: Option<bool>,
}

impl BackendConfig {
    pub fn mock(name: &str, fixtures: impl Into<PathBuf>) -> Self {
        BackendConfig {
            name: name.into(),
            endpoint: MOCK_ENDPOINT.into(),
            model: "mock".into(),
            max_tokens: default_max_tokens(),
            temperature: 0.0,
            budget: default_budget(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            token_counter: default_counter(),
            adapter: AdapterKind::default(),
            api_key_env: default_key_env(),
            min_interval_ms: 0,
            retry_backoff_ms: 0,
            concurrency: default_concurrency(),
            fixtures: Some(fixtures.into()),
            cache: None,
        }
    }

    pub fn is_mock(&self) -> bool {
        self.endpoint == MOCK_ENDPOINT
    }

    pub fn cache_enabled(&self) -> bool {
        self.cache.unwrap_or(!self.is_mock())
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        let bad = |m: &str| Err(GatewayError::InvalidConfig(format!("{}: {m}", self.name)));
        if self.name.trim().is_empty() {
            return bad("name is empty");
        }
        if self.budget == 0 {
            return bad("budget must be > 0");
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad("temperature must be >= 0");
        }
        if self.concurrency == 0 {
            return bad("concurrency must be > 0");
        }
        if self.is_mock() && self.fixtures.is_none() {
            return bad("mock endpoint needs a fixtures file");
        }
        if !self.is_mock() && !(self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://")) {
            return bad("endpoint must be an http(s) URL or \"mock\"");
        }
        Ok(())
    }
}

/// The minimal completion request sent over the wire.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRequest<'a> {
    pub model: &'a str,
    pub prompt: &'a str,
    pub max_tokens: u32,
    pub temperature: f64,
}

#[derive(Serialize)]
struct DigestInput<'a> {
    backend: &'a str,
    model: &'a str,
    max_tokens: u32,
    temperature: f64,
    prompt: &'a str,
}

/// SHA-256 over the canonical JSON of backend, model, generation
/// parameters and prompt.
pub fn prompt_digest(cfg: &BackendConfig, prompt: &str) -> String {
    let input = DigestInput {
        backend: &cfg.name,
        model: &cfg.model,
        max_tokens: cfg.max_tokens,
        temperature: cfg.temperature,
        prompt,
    };
    let bytes = serde_json::to_vec(&input).expect("digest input serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Failure reported by a transport for a single attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    Unreachable(String),
    Timeout,
    Status { status: u16, body: String },
    BadResponse(String),
}

impl TransportError {
    fn is_transient(&self) -> bool {
        match self {
            TransportError::Unreachable(_) | TransportError::Timeout => true,
            TransportError::Status { status, .. } => *status == 429 || *status >= 500,
            TransportError::BadResponse(_) => false,
        }
    }

    fn into_gateway(self, attempts: u32) -> GatewayError {
        match self {
            TransportError::Unreachable(message) => GatewayError::BackendUnreachable { attempts, message },
            TransportError::Timeout => GatewayError::Timeout { attempts },
            TransportError::Status { status, body } => GatewayError::BackendRejected { status, body: excerpt(&body) },
            TransportError::BadResponse(m) => GatewayError::BadResponse(m),
        }
    }
}

fn excerpt(body: &str) -> String {
    const MAX: usize = 200;
    match body.char_indices().nth(MAX) {
        Some((i, _)) => format!("{}…", &body[..i]),
        None => body.to_string(),
    }
}

pub trait Transport: Send + Sync {
    fn send(&self, req: &CompletionRequest<'_>, digest: &str) -> Result<String, TransportError>;

    /// Content hash of anything that determines responses offline (mock
    /// fixtures). `None` for live backends.
    fn fingerprint(&self) -> Option<String> {
        None
    }
}

/// Enforces a minimum interval between request starts.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(interval: Duration) -> Self {
        RateLimiter { interval, next: Mutex::new(None) }
    }

    pub fn acquire(&self) {
        if self.interval.is_zero() {
            return;
        }
        let mut next = self.next.lock().unwrap_or_else(|e| e.into_inner());
        let now = Instant::now();
        if let Some(at) = *next {
            if at > now {
                std::thread::sleep(at - now);
            }
        }
        *next = Some(Instant::now() + self.interval);
    }
}

/// A completion and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub backend: String,
    pub model: String,
    pub prompt_digest: String,
    pub cached: bool,
    pub latency_ms: u64,
}

/// A configured backend with its transport, cache and token counter.
pub struct Gateway {
    cfg: BackendConfig,
    transport: Arc<dyn Transport>,
    cache: Option<ResponseCache>,
    limiter: RateLimiter,
    counter: Arc<dyn TokenCounter>,
}

impl Gateway {
    pub fn new(
        cfg: BackendConfig,
        transport: Arc<dyn Transport>,
        cache: Option<ResponseCache>,
        registry: &CounterRegistry,
    ) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let counter = registry.get(&cfg.token_counter)?;
        let limiter = RateLimiter::new(Duration::from_millis(cfg.min_interval_ms));
        Ok(Gateway { cfg, transport, cache, limiter, counter })
    }

    /// Builds the transport the config names. Relative fixture paths
    /// resolve against `base_dir`; the cache lives under `cache_dir` when
    /// caching is enabled.
    pub fn from_config(
        cfg: BackendConfig,
        base_dir: &Path,
        cache_dir: Option<&Path>,
        registry: &CounterRegistry,
    ) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let transport: Arc<dyn Transport> = if cfg.is_mock() {
            let path = base_dir.join(cfg.fixtures.as_ref().expect("validated"));
            Arc::new(MockTransport::from_path(&path)?)
        } else {
            Arc::new(HttpTransport::new(&cfg)?)
        };
        let cache = match cache_dir {
            Some(dir) if cfg.cache_enabled() => Some(ResponseCache::open(&dir.join(&cfg.name))?),
            _ => None,
        };
        Gateway::new(cfg, transport, cache, registry)
    }

    pub fn config(&self) -> &BackendConfig {
        &self.cfg
    }

    pub fn counter(&self) -> &dyn TokenCounter {
        self.counter.as_ref()
    }

    pub fn transport_fingerprint(&self) -> Option<String> {
        self.transport.fingerprint()
    }

    pub fn truncate(&self, doc: &Document) -> Document {
        truncate_document(doc, self.cfg.budget, self.counter.as_ref())
    }

    pub fn digest(&self, prompt: &str) -> String {
        prompt_digest(&self.cfg, prompt)
    }

    /// Returns the cached completion when present, otherwise calls the
    /// transport with bounded retries and caches the result. Errors are
    /// never cached.
    pub fn complete(&self, bundle: &PromptBundle) -> Result<Completion, GatewayError> {
        if bundle.text.trim().is_empty() {
            return Err(GatewayError::EmptyPrompt);
        }
        let digest = self.digest(&bundle.text);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(&digest)? {
                return Ok(Completion {
                    text: hit.text,
                    backend: self.cfg.name.clone(),
                    model: self.cfg.model.clone(),
                    prompt_digest: digest,
                    cached: true,
                    latency_ms: 0,
                });
            }
        }
        let req = CompletionRequest {
            model: &self.cfg.model,
            prompt: &bundle.text,
            max_tokens: self.cfg.max_tokens,
            temperature: self.cfg.temperature,
        };
        let started = Instant::now();
        let text = self.send_with_retries(&req, &digest)?;
        let latency_ms = started.elapsed().as_millis() as u64;
        if let Some(cache) = &self.cache {
            cache.put(&CacheEntry {
                digest: digest.clone(),
                backend: self.cfg.name.clone(),
                model: self.cfg.model.clone(),
                text: text.clone(),
            })?;
        }
        Ok(Completion {
            text,
            backend: self.cfg.name.clone(),
            model: self.cfg.model.clone(),
            prompt_digest: digest,
            cached: false,
            latency_ms,
        })
    }

    fn send_with_retries(&self, req: &CompletionRequest<'_>, digest: &str) -> Result<String, GatewayError> {
        let max_attempts = self.cfg.max_retries + 1;
        let mut attempt = 0;
        loop {
            attempt += 1;
            self.limiter.acquire();
            match self.transport.send(req, digest) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_transient() && attempt < max_attempts => {
                    let backoff = self.cfg.retry_backoff_ms.saturating_mul(1 << (attempt - 1).min(10));
                    log::warn!("{}: attempt {attempt}/{max_attempts} failed ({e:?}); retrying", self.cfg.name);
                    std::thread::sleep(Duration::from_millis(backoff));
                }
                Err(e) => return Err(e.into_gateway(attempt)),
            }
        }
    }
}
