use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{MetricsError, Prf, TokenSeq};

/// Multiset of n-grams; keys borrow from the token sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NgramCounts<'a> {
    counts: HashMap<&'a [String], usize>,
    total: usize,
}

impl<'a> NgramCounts<'a> {
    /// Number of n-grams counting multiplicity.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, gram: &[String]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a [String], usize)> + '_ {
        self.counts.iter().map(|(k, v)| (*k, *v))
    }

    /// Clipped overlap: sum over shared n-grams of the smaller count.
    pub fn clipped_overlap(&self, other: &NgramCounts<'_>) -> usize {
        let (small, large) = if self.distinct() <= other.distinct() { (self, other) } else { (other, self) };
        small.counts.iter().map(|(gram, &c)| c.min(large.count(gram))).sum()
    }
}

/// All n-grams of `seq` with multiplicity. `n == 0` yields an empty multiset.
pub fn ngram_multiset(seq: &TokenSeq, n: usize) -> NgramCounts<'_> {
    let mut counts = HashMap::new();
    let mut total = 0;
    if n > 0 {
        for gram in seq.tokens().windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
            total += 1;
        }
    }
    NgramCounts { counts, total }
}

fn distinct_ngrams(seq: &TokenSeq, n: usize) -> HashSet<&[String]> {
    seq.tokens().windows(n).collect()
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// ROUGE-N with clipped n-gram counts. Empty denominators give 0.
pub fn rouge_n(candidate: &TokenSeq, reference: &TokenSeq, n: usize) -> Prf {
    let cand = ngram_multiset(candidate, n);
    let refr = ngram_multiset(reference, n);
    let overlap = cand.clipped_overlap(&refr);
    Prf::from_pr(ratio(overlap, cand.total()), ratio(overlap, refr.total()))
}

/// Length of the longest common subsequence.
pub fn lcs_length(a: &TokenSeq, b: &TokenSeq) -> usize {
    lcs_len_slices(a.tokens(), b.tokens())
}

pub(crate) fn lcs_len_slices<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (outer, inner) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if inner.is_empty() {
        return 0;
    }
    // One row plus the diagonal cell; short rows stay on the stack.
    let mut stack = [0u32; 64];
    let mut heap = Vec::new();
    let row: &mut [u32] = if inner.len() < stack.len() {
        &mut stack[..=inner.len()]
    } else {
        heap.resize(inner.len() + 1, 0);
        &mut heap
    };
    for x in outer {
        let mut diag = 0;
        for (j, y) in inner.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { row[j].max(up) };
            diag = up;
        }
    }
    row[inner.len()] as usize
}

pub fn rouge_l(candidate: &TokenSeq, reference: &TokenSeq) -> Prf {
    let lcs = lcs_length(candidate, reference);
    Prf::from_pr(ratio(lcs, candidate.len()), ratio(lcs, reference.len()))
}

/// ROUGE-1, ROUGE-2 and ROUGE-L for one candidate/reference pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScores {
    pub rouge1: Prf,
    pub rouge2: Prf,
    #[serde(rename = "rougeL")]
    pub rouge_l: Prf,
}

impl RougeScores {
    pub fn score(candidate: &TokenSeq, reference: &TokenSeq) -> Self {
        RougeScores {
            rouge1: rouge_n(candidate, reference, 1),
            rouge2: rouge_n(candidate, reference, 2),
            rouge_l: rouge_l(candidate, reference),
        }
    }
}

/// Percentage of distinct summary n-grams that never occur in the source.
pub fn novel_ngram_pct(summary: &TokenSeq, source: &TokenSeq, n: usize) -> Result<f64, MetricsError> {
    if n == 0 || summary.len() < n {
        return Err(MetricsError::DegenerateSummary { tokens: summary.len(), n });
    }
    let summary_grams = distinct_ngrams(summary, n);
    let source_grams = distinct_ngrams(source, n);
    let novel = summary_grams.iter().filter(|g| !source_grams.contains(*g)).count();
    Ok(100.0 * novel as f64 / summary_grams.len() as f64)
}
