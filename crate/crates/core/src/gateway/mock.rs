use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::{sha256_hex, CompletionRequest, GatewayError, Transport, TransportError};

/// A scripted failure returned instead of a completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MockFailure {
    Status {
        status: u16,
        #[serde(default)]
        body: String,
    },
    Unreachable,
    Timeout,
}

/// One fixture line. Selected by exact prompt digest, or by every
/// `contains` substring occurring in the prompt and the prompt ending with
/// `suffix`. The first matching line wins.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contains: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suffix: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<MockFailure>,
}

impl MockEntry {
    fn matches(&self, prompt: &str, digest: &str) -> bool {
        if let Some(d) = &self.digest {
            return d == digest;
        }
        self.contains.iter().all(|s| prompt.contains(s.as_str()))
            && self.suffix.as_ref().is_none_or(|s| prompt.trim_end().ends_with(s.as_str()))
    }
}

/// Offline transport that answers from a fixture list.
#[derive(Debug)]
pub struct MockTransport {
    entries: Vec<MockEntry>,
    fingerprint: String,
    calls: AtomicUsize,
}

impl MockTransport {
    pub fn from_entries(entries: Vec<MockEntry>) -> Result<Self, GatewayError> {
        for (i, e) in entries.iter().enumerate() {
            let selectors = e.digest.is_some() || !e.contains.is_empty() || e.suffix.is_some();
            if !selectors {
                return Err(GatewayError::InvalidConfig(format!("mock fixture {} has no selector", i + 1)));
            }
            if e.completion.is_some() == e.error.is_some() {
                return Err(GatewayError::InvalidConfig(format!(
                    "mock fixture {} needs exactly one of completion or error",
                    i + 1
                )));
            }
        }
        let canonical = serde_json::to_vec(&entries).map_err(|e| GatewayError::InvalidConfig(e.to_string()))?;
        Ok(MockTransport { fingerprint: sha256_hex(&canonical), entries, calls: AtomicUsize::new(0) })
    }

    /// Reads a line-delimited fixture file.
    pub fn from_path(path: &Path) -> Result<Self, GatewayError> {
        let text =
            fs::read_to_string(path).map_err(|e| GatewayError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let entry = serde_json::from_str(line)
                .map_err(|e| GatewayError::InvalidConfig(format!("{}:{}: {e}", path.display(), i + 1)))?;
            entries.push(entry);
        }
        MockTransport::from_entries(entries)
    }

    /// Number of requests served so far, including scripted failures.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for MockTransport {
    fn send(&self, req: &CompletionRequest<'_>, digest: &str) -> Result<String, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let entry = self.entries.iter().find(|e| e.matches(req.prompt, digest)).ok_or_else(|| {
            TransportError::Status { status: 404, body: format!("no mock fixture matches prompt {digest}") }
        })?;
        match (&entry.completion, &entry.error) {
            (Some(text), _) => Ok(text.clone()),
            (None, Some(MockFailure::Status { status, body })) => {
                Err(TransportError::Status { status: *status, body: body.clone() })
            }
            (None, Some(MockFailure::Unreachable)) => Err(TransportError::Unreachable("scripted".into())),
            (None, Some(MockFailure::Timeout)) | (None, None) => Err(TransportError::Timeout),
        }
    }

    fn fingerprint(&self) -> Option<String> {
        Some(self.fingerprint.clone())
    }
}
