use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::ExtractionAnswer;
use crate::corpus::{Category, Document};
use crate::metrics::{normalize_element, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LintKind {
    DateHallucination,
    ElementRedundancy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub doc_id: String,
    pub kind: LintKind,
    pub category: Category,
    pub element: String,
    pub detail: String,
}

const MONTHS: [(&str, &str); 12] = [
    ("january", "jan"),
    ("february", "feb"),
    ("march", "mar"),
    ("april", "apr"),
    ("may", "may"),
    ("june", "jun"),
    ("july", "jul"),
    ("august", "aug"),
    ("september", "sep"),
    ("october", "oct"),
    ("november", "nov"),
    ("december", "dec"),
];

const RUN_FILLERS: [&str; 2] = ["of", "the"];

static CLOCK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b\d{1,2}:\d{2}\b").expect("valid regex"));

/// Canonical date token: a year, a month name or a day number.
fn date_token(word: &str) -> Option<String> {
    let w = word.to_lowercase();
    if let Some((full, _)) =
        MONTHS.iter().find(|(full, abbr)| w == *full || w == *abbr || (w == "sept" && *abbr == "sep"))
    {
        return Some((*full).to_string());
    }
    let digits = w.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let suffix = &w[digits.len()..];
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let n: u32 = digits.parse().ok()?;
    match (digits.len(), suffix) {
        (4, "") if (1000..3000).contains(&n) => Some(n.to_string()),
        (1 | 2, "" | "st" | "nd" | "rd" | "th") if (1..=31).contains(&n) => Some(n.to_string()),
        _ => None,
    }
}

/// Maximal runs of date tokens. Only "of" and "the" may sit between the
/// tokens of one run; clock times are ignored.
fn date_runs(text: &str) -> Vec<Vec<String>> {
    let text = CLOCK.replace_all(text, " ");
    let mut runs = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for word in text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        if let Some(t) = date_token(word) {
            current.push(t);
        } else if !current.is_empty() && !RUN_FILLERS.contains(&word.to_lowercase().as_str()) {
            runs.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

/// Flags extracted dates whose year/month/day tokens do not occur as a
/// contiguous run in the source. Purely lexical: a date the reader could
/// infer but the source never states is still flagged.
pub fn lint_dates(ans: &ExtractionAnswer, doc: &Document) -> Vec<LintFinding> {
    let source_runs = date_runs(&doc.text);
    let supported = |run: &[String]| source_runs.iter().any(|s| s.windows(run.len()).any(|w| w == run));
    let mut out = Vec::new();
    for date in &ans.parsed.dates {
        let missing: Vec<String> = date_runs(date).into_iter().filter(|r| !supported(r)).map(|r| r.join(" ")).collect();
        if !missing.is_empty() {
            out.push(LintFinding {
                doc_id: ans.doc_id.clone(),
                kind: LintKind::DateHallucination,
                category: Category::Date,
                element: date.clone(),
                detail: format!("not in source: {}", missing.join("; ")),
            });
        }
    }
    out
}

fn token_containment(shorter: &str, longer: &str) -> f64 {
    let a = tokenize(shorter);
    let b = tokenize(longer);
    if a.is_empty() {
        return 0.0;
    }
    a.iter().filter(|t| b.tokens().contains(t)).count() as f64 / a.len() as f64
}

/// Near-duplicates within a category (token containment of the shorter
/// entry in the longer at least 0.8) and verbatim duplicates across
/// categories. The shorter or later entry is reported.
pub fn lint_redundancy(ans: &ExtractionAnswer) -> Vec<LintFinding> {
    const THRESHOLD: f64 = 0.8;
    let mut out = Vec::new();
    let finding = |category, element: &String, detail: String| LintFinding {
        doc_id: ans.doc_id.clone(),
        kind: LintKind::ElementRedundancy,
        category,
        element: element.clone(),
        detail,
    };
    for c in Category::ALL {
        let list = ans.parsed.get(c);
        for (i, x) in list.iter().enumerate() {
            for y in &list[i + 1..] {
                let (short, long) = if tokenize(x).len() <= tokenize(y).len() { (x, y) } else { (y, x) };
                let score = token_containment(short, long);
                if score >= THRESHOLD {
                    out.push(finding(c, short, format!("{score:.2} of its tokens appear in {long:?}")));
                }
            }
        }
    }
    for (ci, c) in Category::ALL.iter().enumerate() {
        for later in &Category::ALL[ci + 1..] {
            for x in ans.parsed.get(*c) {
                let nx = normalize_element(x);
                for y in ans.parsed.get(*later) {
                    if normalize_element(y) == nx {
                        out.push(finding(*later, y, format!("duplicates {c} element {x:?}")));
                    }
                }
            }
        }
    }
    out
}
