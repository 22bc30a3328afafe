//! Stage-1 answer parsing and extraction lints.
//!
//! Answers are located by marker phrases from a data-driven lexicon
//! (`lexicon.json`, overridable at runtime). The text after a marker, up to
//! the next marker, holds that category's elements. Two shapes are common:
//! numbered lines (`1. The important entities in this document are …`) and
//! a single prose paragraph.

mod lint;

use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::LazyLock;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lint::{lint_dates, lint_redundancy, LintFinding, LintKind};

use crate::corpus::{Category, ElementSet};
use crate::metrics::{normalize_element, split_sentences, tokenize};

const DEFAULT_LEXICON: &str = include_str!("lexicon.json");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("lexicon has no markers for {0}")]
    MissingCategory(Category),
    #[error("marker regex: {0}")]
    Regex(#[from] regex::Error),
}

/// Marker phrases per category plus phrases that assert absence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    pub markers: BTreeMap<Category, Vec<String>>,
    #[serde(default)]
    pub absence: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_LEXICON).expect("bundled lexicon parses")
    }
}

impl Lexicon {
    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Where a category marker was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerEvidence {
    pub category: Category,
    pub marker: String,
    pub span: Range<usize>,
}

/// A raw Stage-1 completion, its parsed elements and validity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionAnswer {
    pub doc_id: String,
    pub raw: String,
    pub parsed: ElementSet,
    /// True iff every category has marker evidence.
    pub valid: bool,
    pub marker_evidence: Vec<MarkerEvidence>,
}

impl ExtractionAnswer {
    pub fn from_parts(doc_id: &str, raw: &str, parsed: ElementSet, valid: bool) -> Self {
        ExtractionAnswer { doc_id: doc_id.into(), raw: raw.into(), parsed, valid, marker_evidence: Vec::new() }
    }
}

/// Compiled lexicon.
#[derive(Debug, Clone)]
pub struct Parser {
    markers: Vec<(Category, Regex)>,
    absence: Vec<String>,
}

static DEFAULT_PARSER: LazyLock<Parser> =
    LazyLock::new(|| Parser::new(&Lexicon::default()).expect("bundled lexicon compiles"));

static COPULA: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?P<subj>.+?)\s+(?:is|are|was|were)\s+(?P<rest>\S.*)$").expect("valid regex"));

const RELATIVE_STARTS: [&str; 5] = ["when", "where", "which", "who", "whose"];

impl Parser {
    pub fn new(lexicon: &Lexicon) -> Result<Self, LexiconError> {
        let mut markers = Vec::new();
        for c in Category::ALL {
            let mut phrases = lexicon.markers.get(&c).cloned().unwrap_or_default();
            phrases.retain(|p| !p.trim().is_empty());
            if phrases.is_empty() {
                return Err(LexiconError::MissingCategory(c));
            }
            phrases.sort_by_key(|p| std::cmp::Reverse(p.len()));
            let alternation = phrases
                .iter()
                .map(|p| p.split_whitespace().map(regex::escape).collect::<Vec<_>>().join(r"\s+"))
                .collect::<Vec<_>>()
                .join("|");
            let pattern = format!(r"\b(?:\d+[.)]\s*)?(?:the\s+)?(?:{alternation})\b");
            markers.push((c, RegexBuilder::new(&pattern).case_insensitive(true).build()?));
        }
        let absence = lexicon.absence.iter().map(|a| normalize_element(a)).filter(|a| !a.is_empty()).collect();
        Ok(Parser { markers, absence })
    }

    /// Non-overlapping marker hits in text order. On overlap the earlier,
    /// then longer, hit wins.
    fn find_markers(&self, raw: &str) -> Vec<MarkerEvidence> {
        let mut hits: Vec<MarkerEvidence> = self
            .markers
            .iter()
            .flat_map(|(c, re)| {
                re.find_iter(raw).map(move |m| MarkerEvidence {
                    category: *c,
                    marker: m.as_str().to_string(),
                    span: m.range(),
                })
            })
            .collect();
        hits.sort_by(|a, b| a.span.start.cmp(&b.span.start).then(b.span.end.cmp(&a.span.end)));
        let mut kept: Vec<MarkerEvidence> = Vec::new();
        for h in hits {
            if kept.last().is_none_or(|k| h.span.start >= k.span.end) {
                kept.push(h);
            }
        }
        kept
    }

    pub fn parse(&self, doc_id: &str, raw: &str) -> ExtractionAnswer {
        let hits = self.find_markers(raw);
        let mut evidence: Vec<MarkerEvidence> = Vec::new();
        let mut contents: BTreeMap<Category, &str> = BTreeMap::new();
        for (i, h) in hits.iter().enumerate() {
            if contents.contains_key(&h.category) {
                continue;
            }
            let end = hits.get(i + 1).map_or(raw.len(), |n| n.span.start);
            contents.insert(h.category, &raw[h.span.end..end]);
            evidence.push(h.clone());
        }
        let valid = Category::ALL.iter().all(|c| contents.contains_key(c));
        let mut parsed = ElementSet::default();
        if valid {
            for c in [Category::Entity, Category::Date, Category::Event] {
                *parsed.get_mut(c) = self.enumeration(first_clause(contents[&c]));
            }
            let result = first_clause(contents[&Category::Result]);
            if !self.asserts_absence(result) && !result.is_empty() {
                parsed.results = vec![elide_subject(result, &parsed.entities).to_string()];
            }
            parsed.dedup();
        }
        ExtractionAnswer { doc_id: doc_id.into(), raw: raw.into(), parsed, valid, marker_evidence: evidence }
    }

    fn asserts_absence(&self, content: &str) -> bool {
        let norm = normalize_element(content);
        self.absence.iter().any(|a| norm == *a || norm.starts_with(&format!("{a} ")))
    }

    fn enumeration(&self, content: &str) -> Vec<String> {
        if content.is_empty() || self.asserts_absence(content) {
            return Vec::new();
        }
        let comma_items = split_outside_parens(content, ",");
        let mut items: Vec<&str> = Vec::new();
        if comma_items.len() > 1 {
            let count = comma_items.len();
            for (i, raw_item) in comma_items.into_iter().enumerate() {
                let (item, had_conj) = strip_conjunction(raw_item.trim());
                if i + 1 == count && i >= 1 && !had_conj {
                    items.extend(split_outside_parens(item, " and "));
                } else {
                    items.push(item);
                }
            }
        } else {
            items = split_outside_parens(content, " and ");
        }
        items
            .into_iter()
            .map(|s| trim_item(strip_conjunction(s.trim()).0))
            .filter(|s| !tokenize(s).is_empty())
            .filter(|s| {
                let first = s.split_whitespace().next().unwrap_or("").to_lowercase();
                !RELATIVE_STARTS.contains(&first.as_str())
            })
            .map(str::to_string)
            .collect()
    }
}

/// Parses with the bundled lexicon.
pub fn parse_stage1(doc_id: &str, raw: &str) -> ExtractionAnswer {
    DEFAULT_PARSER.parse(doc_id, raw)
}

/// First line, then first sentence, of the text after a marker, without a
/// leading colon or "that" and without terminal punctuation.
fn first_clause(segment: &str) -> &str {
    let line = segment.trim_start_matches([' ', '\t', ':']).lines().next().unwrap_or("").trim();
    let sentence = split_sentences(line).into_iter().next().unwrap_or("");
    let mut s = sentence.trim().trim_start_matches(':').trim_start();
    if s.get(..5).is_some_and(|p| p.eq_ignore_ascii_case("that ")) {
        s = s[5..].trim_start();
    }
    trim_item(s)
}

fn trim_item(s: &str) -> &str {
    s.trim().trim_end_matches(['.', ',', ';', '!', '?']).trim_end()
}

fn strip_conjunction(s: &str) -> (&str, bool) {
    for conj in ["and ", "or "] {
        if s.len() > conj.len() && s.get(..conj.len()).is_some_and(|p| p.eq_ignore_ascii_case(conj)) {
            return (s[conj.len()..].trim_start(), true);
        }
    }
    (s, false)
}

/// Splits on `sep` wherever it occurs outside parentheses or brackets.
fn split_outside_parens<'a>(s: &'a str, sep: &str) -> Vec<&'a str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut i = 0;
    let bytes = s.as_bytes();
    while i < s.len() {
        match bytes[i] {
            b'(' | b'[' => depth += 1,
            b')' | b']' => depth = (depth - 1).max(0),
            _ => {}
        }
        if depth == 0 && s.is_char_boundary(i) && s[i..].starts_with(sep) {
            out.push(&s[start..i]);
            i += sep.len();
            start = i;
            continue;
        }
        i += 1;
    }
    out.push(&s[start..]);
    out
}

/// Drops a leading "<subject> is|are|was|were" when the subject names an
/// extracted entity (the full entity or its trailing words), so
/// "Blagojevich is serving …" yields "serving …".
fn elide_subject<'a>(clause: &'a str, entities: &[String]) -> &'a str {
    let Some(caps) = COPULA.captures(clause) else {
        return clause;
    };
    let subject = tokenize(&caps["subj"]);
    if subject.is_empty() || subject.len() > 6 {
        return clause;
    }
    let names = entities.iter().any(|e| {
        let toks = tokenize(e);
        toks.len() >= subject.len() && toks.tokens()[toks.len() - subject.len()..] == *subject.tokens()
    });
    if names {
        caps.name("rest").map_or(clause, |m| m.as_str())
    } else {
        clause
    }
}
