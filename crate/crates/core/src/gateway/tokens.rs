use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::Arc;

use super::GatewayError;
use crate::corpus::Document;

/// Splits text into token spans. Implementations must return sorted,
/// non-overlapping byte ranges that cover no whitespace-only text.
pub trait TokenCounter: Send + Sync {
    fn id(&self) -> &str;
    fn spans(&self, text: &str) -> Vec<Range<usize>>;

    fn count(&self, text: &str) -> usize {
        self.spans(text).len()
    }
}

/// One token per maximal run of non-whitespace characters.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceCounter;

impl TokenCounter for WhitespaceCounter {
    fn id(&self) -> &str {
        "whitespace"
    }

    fn spans(&self, text: &str) -> Vec<Range<usize>> {
        let mut spans = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    spans.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            spans.push(s..text.len());
        }
        spans
    }

    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

/// Token counters by id. `whitespace` is always registered.
#[derive(Clone)]
pub struct CounterRegistry {
    counters: BTreeMap<String, Arc<dyn TokenCounter>>,
}

impl Default for CounterRegistry {
    fn default() -> Self {
        let mut r = CounterRegistry { counters: BTreeMap::new() };
        r.register(Arc::new(WhitespaceCounter));
        r
    }
}

impl CounterRegistry {
    pub fn register(&mut self, counter: Arc<dyn TokenCounter>) {
        self.counters.insert(counter.id().to_string(), counter);
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn TokenCounter>, GatewayError> {
        self.counters.get(id).cloned().ok_or_else(|| GatewayError::UnknownCounter(id.to_string()))
    }

    pub fn ids(&self) -> Vec<&str> {
        self.counters.keys().map(String::as_str).collect()
    }
}

pub fn count_tokens(text: &str, counter_id: &str, registry: &CounterRegistry) -> Result<usize, GatewayError> {
    Ok(registry.get(counter_id)?.count(text))
}

/// Keeps the document prefix through the end of its `budget`-th token.
/// Shorter documents are returned unchanged. A zero budget is treated as 1.
pub fn truncate_document(doc: &Document, budget: usize, counter: &dyn TokenCounter) -> Document {
    let spans = counter.spans(&doc.text);
    if spans.len() <= budget {
        return doc.clone();
    }
    let end = spans[budget.max(1) - 1].end;
    Document { text: doc.text[..end].to_string(), ..doc.clone() }
}
