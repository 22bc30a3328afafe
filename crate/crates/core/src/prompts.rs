//! Prompt assembly for the zero-shot baseline and both SumCoT stages.
//!
//! Blocks are joined by a separator (a blank line by default):
//!
//! - standard: `S`, instruction
//! - stage 1: `S`, the four questions plus the closing line (one per line)
//! - stage 2: the stage-1 text, the stage-1 answer, the integration line

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, Style};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("stage-2 prompt needs a non-empty stage-1 answer")]
    EmptyAnswer,
    #[error("unknown prompt override key {0:?}")]
    UnknownOverride(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Standard,
    Stage1,
    Stage2,
}

/// Every instruction string used to build prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptSet {
    pub standard_multi: String,
    pub standard_one: String,
    /// Guiding questions in fixed order: entity, date, event, result.
    pub questions: [String; 4],
    pub closing: String,
    pub p_prime_multi: String,
    pub p_prime_one: String,
    pub separator: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet {
            standard_multi: "Summarize the above article:".into(),
            standard_one: "Summarize the above article in one sentence:".into(),
            questions: [
                "What are the important entities in this document?".into(),
                "What are the important dates in this document?".into(),
                "What events are happening in this document?".into(),
                "What is the result of these events?".into(),
            ],
            closing: "Please answer the above questions:".into(),
            p_prime_multi: "Let's integrate the above information and summarize the article:".into(),
            p_prime_one: "Let's integrate the above information and summarize the article in one sentence:".into(),
            separator: "\n\n".into(),
        }
    }
}

impl PromptSet {
    /// Applies overrides keyed by `standard_multi`, `standard_one`,
    /// `q1`..`q4`, `p_prime_multi`, `p_prime_one`, `closing` or `separator`.
    pub fn with_overrides(mut self, overrides: &BTreeMap<String, String>) -> Result<Self, PromptError> {
        for (key, value) in overrides {
            let slot = match key.as_str() {
                "standard_multi" => &mut self.standard_multi,
                "standard_one" => &mut self.standard_one,
                "q1" => &mut self.questions[0],
                "q2" => &mut self.questions[1],
                "q3" => &mut self.questions[2],
                "q4" => &mut self.questions[3],
                "closing" => &mut self.closing,
                "p_prime_multi" => &mut self.p_prime_multi,
                "p_prime_one" => &mut self.p_prime_one,
                "separator" => &mut self.separator,
                other => return Err(PromptError::UnknownOverride(other.to_string())),
            };
            *slot = value.clone();
        }
        Ok(self)
    }

    fn sep(&self) -> &str {
        if self.separator.is_empty() {
            "\n"
        } else {
            &self.separator
        }
    }

    fn standard_instruction(&self, style: Style) -> &str {
        match style {
            Style::MultiSentence => &self.standard_multi,
            Style::OneSentence => &self.standard_one,
        }
    }

    fn p_prime(&self, style: Style) -> &str {
        match style {
            Style::MultiSentence => &self.p_prime_multi,
            Style::OneSentence => &self.p_prime_one,
        }
    }

    /// The question block: four questions and the closing line.
    pub fn question_block(&self) -> String {
        let mut lines: Vec<&str> = self.questions.iter().map(String::as_str).collect();
        lines.push(&self.closing);
        lines.join("\n")
    }
}

/// An assembled prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub stage: Stage,
    pub doc_id: String,
    pub style: Style,
    pub text: String,
}

pub fn standard_prompt(doc: &Document, prompts: &PromptSet) -> PromptBundle {
    PromptBundle {
        stage: Stage::Standard,
        doc_id: doc.id.clone(),
        style: doc.style,
        text: [doc.text.as_str(), prompts.standard_instruction(doc.style)].join(prompts.sep()),
    }
}

/// Stage 1 is the same for both styles.
pub fn stage1_prompt(doc: &Document, prompts: &PromptSet) -> PromptBundle {
    PromptBundle {
        stage: Stage::Stage1,
        doc_id: doc.id.clone(),
        style: doc.style,
        text: [doc.text.as_str(), &prompts.question_block()].join(prompts.sep()),
    }
}

/// Stage 2 appends the stage-1 answer and the integration instruction to
/// the stage-1 prompt. The answer is trimmed before insertion.
pub fn stage2_prompt(doc: &Document, prompts: &PromptSet, answer: &str) -> Result<PromptBundle, PromptError> {
    let answer = answer.trim();
    if answer.is_empty() {
        return Err(PromptError::EmptyAnswer);
    }
    let stage1 = stage1_prompt(doc, prompts);
    Ok(PromptBundle {
        stage: Stage::Stage2,
        doc_id: doc.id.clone(),
        style: doc.style,
        text: [stage1.text.as_str(), answer, prompts.p_prime(doc.style)].join(prompts.sep()),
    })
}
