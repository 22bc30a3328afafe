use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BackendConfig, CompletionRequest, GatewayError, Transport, TransportError};

/// Pulls completion text out of a backend's JSON response.
pub trait ResponseAdapter: Send + Sync {
    fn extract(&self, body: &Value) -> Option<String>;
}

/// `choices[0].text`, or `choices[0].message.content`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OpenAiAdapter;

impl ResponseAdapter for OpenAiAdapter {
    fn extract(&self, body: &Value) -> Option<String> {
        let choice = body.get("choices")?.get(0)?;
        choice
            .get("text")
            .or_else(|| choice.get("message").and_then(|m| m.get("content")))
            .and_then(Value::as_str)
            .map(str::to_string)
    }
}

/// A top-level `completion` or `text` string.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlainAdapter;

impl ResponseAdapter for PlainAdapter {
    fn extract(&self, body: &Value) -> Option<String> {
        body.get("completion").or_else(|| body.get("text")).and_then(Value::as_str).map(str::to_string)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdapterKind {
    #[default]
    OpenAi,
    Plain,
}

impl AdapterKind {
    fn build(self) -> Box<dyn ResponseAdapter> {
        match self {
            AdapterKind::OpenAi => Box::new(OpenAiAdapter),
            AdapterKind::Plain => Box::new(PlainAdapter),
        }
    }
}

/// Blocking JSON-over-HTTP transport. The credential is read from the
/// configured environment variable at construction and sent as a bearer
/// token.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    endpoint: String,
    api_key: Option<String>,
    adapter: Box<dyn ResponseAdapter>,
}

impl HttpTransport {
    pub fn new(cfg: &BackendConfig) -> Result<Self, GatewayError> {
        Self::with_adapter(cfg, cfg.adapter.build())
    }

    pub fn with_adapter(cfg: &BackendConfig, adapter: Box<dyn ResponseAdapter>) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| GatewayError::InvalidConfig(e.to_string()))?;
        let api_key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
        if api_key.is_none() {
            log::warn!("{}: ${} is not set; sending unauthenticated requests", cfg.name, cfg.api_key_env);
        }
        Ok(HttpTransport { client, endpoint: cfg.endpoint.clone(), api_key, adapter })
    }
}

impl Transport for HttpTransport {
    fn send(&self, req: &CompletionRequest<'_>, _digest: &str) -> Result<String, TransportError> {
        let mut builder = self.client.post(&self.endpoint).json(req);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let resp = builder.send().map_err(|e| {
            if e.is_timeout() {
                TransportError::Timeout
            } else {
                TransportError::Unreachable(e.to_string())
            }
        })?;
        let status = resp.status();
        let body = resp.text().map_err(|e| {
            if e.is_timeout() {
                TransportError::Timeout
            } else {
                TransportError::Unreachable(e.to_string())
            }
        })?;
        if !status.is_success() {
            return Err(TransportError::Status { status: status.as_u16(), body });
        }
        let json: Value = serde_json::from_str(&body).map_err(|e| TransportError::BadResponse(e.to_string()))?;
        self.adapter.extract(&json).ok_or_else(|| TransportError::BadResponse("no completion text in response".into()))
    }
}
