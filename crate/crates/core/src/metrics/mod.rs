//! Scoring: tokenization, ROUGE-1/2/L, novel n-grams, element
//! precision/recall, coverage and Likert aggregation.

mod elements;
mod likert;
mod rouge;
mod tokenize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use elements::{
    coverage, element_pr, Adjudications, AnnotatorPair, CategoryScores, CoverageScores, ElementScores, MatchKey,
    Matcher,
};
pub use likert::{aggregate_likert, LikertRow, LikertTable, DIMENSIONS, LIKERT_BASELINE};
pub use rouge::{lcs_length, ngram_multiset, novel_ngram_pct, rouge_l, rouge_n, NgramCounts, RougeScores};
pub use tokenize::{normalize_element, split_sentences, tokenize, TokenSeq};

use crate::exec::{map_ordered, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("summary has {tokens} tokens, fewer than n = {n}")]
    DegenerateSummary { tokens: usize, n: usize },
    #[error("element scoring needs at least one annotator")]
    NoAnnotators,
    #[error("no adjudication for doc {doc_id:?}, {category} element {element:?} against {target:?}")]
    MissingAdjudication { doc_id: String, category: String, element: String, target: String },
    #[error("coverage requires a valid extraction")]
    InvalidExtraction,
    #[error("Likert score {score} for doc {doc_id:?} is outside -3..=3")]
    OutOfRangeScore { doc_id: String, score: i64 },
    #[error("unknown Likert dimension {0:?}")]
    UnknownDimension(String),
    #[error("Likert rows may not score the baseline system {0:?}; it is fixed at 0")]
    BaselineRow(String),
}

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let sum = precision + recall;
        let f1 = if sum == 0.0 { 0.0 } else { 2.0 * precision * recall / sum };
        Prf { precision, recall, f1 }
    }

    /// Components in [0, 1] and f1 between min(p, r) and max(p, r).
    pub fn is_well_formed(&self) -> bool {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(self.precision) && unit(self.recall) && unit(self.f1)) {
            return false;
        }
        if self.precision > 0.0 && self.recall > 0.0 {
            let lo = self.precision.min(self.recall);
            let hi = self.precision.max(self.recall);
            self.f1 >= lo - 1e-12 && self.f1 <= hi + 1e-12
        } else {
            self.f1 == 0.0
        }
    }

    /// Component-wise mean of p, r and f1. Empty input gives zeros.
    pub fn mean_of(items: &[Prf]) -> Prf {
        if items.is_empty() {
            return Prf::default();
        }
        let n = items.len() as f64;
        Prf {
            precision: items.iter().map(|p| p.precision).sum::<f64>() / n,
            recall: items.iter().map(|p| p.recall).sum::<f64>() / n,
            f1: items.iter().map(|p| p.f1).sum::<f64>() / n,
        }
    }
}

/// Scores each (candidate, reference) pair; output order follows input.
pub fn score_pairs(pairs: &[(TokenSeq, TokenSeq)], exec: Execution) -> Vec<RougeScores> {
    map_ordered(pairs, exec, |(cand, reference)| RougeScores::score(cand, reference))
}

/// Corpus ROUGE: unweighted mean over documents of each p, r and f1.
pub fn corpus_rouge(scores: &[RougeScores]) -> RougeScores {
    let pick = |f: fn(&RougeScores) -> Prf| Prf::mean_of(&scores.iter().map(f).collect::<Vec<_>>());
    RougeScores { rouge1: pick(|s| s.rouge1), rouge2: pick(|s| s.rouge2), rouge_l: pick(|s| s.rouge_l) }
}
