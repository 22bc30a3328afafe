use std::fmt;

use serde::{Deserialize, Serialize};

/// Normalized token sequence: lowercased, punctuation stripped, split on
/// whitespace. Never contains an empty token.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// Builds a sequence from tokens that are already normalized. Tokens are
    /// re-normalized so the invariants hold for any input.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        TokenSeq(tokens.into_iter().filter_map(|t| normalize_token(t.as_ref())).collect())
    }

    /// Tokens joined by single spaces; `tokenize(seq.joined()) == seq`.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.joined())
    }
}

impl<'a> IntoIterator for &'a TokenSeq {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

fn normalize_token(raw: &str) -> Option<String> {
    let tok: String = raw.chars().flat_map(char::to_lowercase).filter(|c| c.is_alphanumeric()).collect();
    (!tok.is_empty()).then_some(tok)
}

/// Splits on whitespace, lowercases and strips every non-alphanumeric
/// character. `"U.S. Senate"` becomes `[us, senate]`.
pub fn tokenize(text: &str) -> TokenSeq {
    TokenSeq(text.split_whitespace().filter_map(normalize_token).collect())
}

/// Normalized form used for element identity: tokens joined by spaces.
pub fn normalize_element(text: &str) -> String {
    tokenize(text).joined()
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "gen", "gov", "sen", "rep", "lt", "col", "capt", "cpl", "sgt",
    "insp", "supt", "rev", "hon", "vs", "v", "no", "nos", "etc", "inc", "ltd", "co", "corp", "mt", "ft", "jan", "feb",
    "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "approx", "est", "fig", "al",
];

/// Splits text into sentences.
///
/// A sentence ends at `.`, `!` or `?` (optionally followed by closing quotes
/// or brackets) when whitespace follows. A period does not end a sentence
/// after a known abbreviation, a single letter, or a dotted acronym such as
/// `U.S.`. Runs of terminators (`..`, `?!`) count once.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (_, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?') {
                j += 1;
            }
            while j < chars.len() && matches!(chars[j].1, '"' | '\'' | ')' | ']' | '’' | '”') {
                j += 1;
            }
            let at_end = j >= chars.len();
            let followed_by_space = !at_end && chars[j].1.is_whitespace();
            if (at_end || followed_by_space) && !(c == '.' && j == i + 1 && is_abbreviation(text, chars[i].0)) {
                let end = if at_end { text.len() } else { chars[j].0 };
                push_sentence(&mut sentences, &text[start..end]);
                start = end;
            }
            i = j;
        } else {
            i += 1;
        }
    }
    push_sentence(&mut sentences, &text[start..]);
    sentences
}

fn push_sentence<'a>(out: &mut Vec<&'a str>, piece: &'a str) {
    let trimmed = piece.trim();
    if trimmed.chars().any(|c| c.is_alphanumeric()) {
        out.push(trimmed);
    }
}

/// True when the period at byte `dot` closes an abbreviation rather than a
/// sentence.
fn is_abbreviation(text: &str, dot: usize) -> bool {
    let before = &text[..dot];
    let word_start = before
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace() || matches!(c, '(' | '"' | '\''))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let word = &before[word_start..];
    if word.is_empty() {
        return false;
    }
    if word.contains('.') {
        // dotted acronym like "U.S" or "e.g"
        return word.split('.').all(|part| part.chars().count() <= 2);
    }
    let mut letters = word.chars();
    if let (Some(first), None) = (letters.next(), letters.next()) {
        return first.is_alphabetic();
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}
