use serde::{Deserialize, Serialize};

use super::{MetricReport, PipelineError};

/// Corpus F1 scores in points (x100, two decimals) with deltas against the
/// baseline row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonRow {
    pub system: String,
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
    pub semantic_similarity: Option<f64>,
    pub delta_rouge1: f64,
    pub delta_rouge2: f64,
    pub delta_rouge_l: f64,
    pub delta_semantic_similarity: Option<f64>,
    pub is_baseline: bool,
}

/// Rounds a [0, 1] score to hundredths of a point; deltas are taken on
/// these integers so they match the printed values exactly.
fn centipoints(score: f64) -> i64 {
    (score * 10_000.0).round() as i64
}

fn points(c: i64) -> f64 {
    c as f64 / 100.0
}

/// One row per report, sorted by ROUGE-L descending, then label.
pub fn compare(reports: &[MetricReport], baseline: &str) -> Result<Vec<ComparisonRow>, PipelineError> {
    if reports.len() < 2 {
        return Err(PipelineError::TooFewReports);
    }
    let base = reports
        .iter()
        .find(|r| r.meta.system == baseline)
        .ok_or_else(|| PipelineError::UnknownBaseline(baseline.to_string()))?;
    let base_docs = base.doc_ids();
    for r in reports {
        if r.doc_ids() != base_docs {
            return Err(PipelineError::DocSetMismatch(format!("{} vs {}", r.meta.system, base.meta.system)));
        }
    }
    let cents = |r: &MetricReport| {
        [
            centipoints(r.corpus.rouge.rouge1.f1),
            centipoints(r.corpus.rouge.rouge2.f1),
            centipoints(r.corpus.rouge.rouge_l.f1),
        ]
    };
    let b = cents(base);
    let b_sem = base.meta.semantic_similarity.map(centipoints);
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|r| {
            let c = cents(r);
            let sem = r.meta.semantic_similarity.map(centipoints);
            ComparisonRow {
                system: r.meta.system.clone(),
                rouge1: points(c[0]),
                rouge2: points(c[1]),
                rouge_l: points(c[2]),
                semantic_similarity: sem.map(points),
                delta_rouge1: points(c[0] - b[0]),
                delta_rouge2: points(c[1] - b[1]),
                delta_rouge_l: points(c[2] - b[2]),
                delta_semantic_similarity: sem.zip(b_sem).map(|(s, bs)| points(s - bs)),
                is_baseline: r.meta.system == baseline,
            }
        })
        .collect();
    rows.sort_by(|x, y| y.rouge_l.total_cmp(&x.rouge_l).then_with(|| x.system.cmp(&y.system)));
    Ok(rows)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::RefKind;
    use crate::metrics::{Prf, RougeScores};
    use crate::pipeline::{CorpusScores, DocumentScores, ReportMeta};

    pub(crate) fn report(system: &str, rl: f64, docs: &[&str]) -> MetricReport {
        let prf = Prf::from_pr(rl, rl);
        let rouge = RougeScores { rouge1: prf, rouge2: prf, rouge_l: prf };
        MetricReport {
            meta: ReportMeta {
                system: system.into(),
                run_id: None,
                mode: None,
                reference_kind: RefKind::ElementAware,
                matcher: "exact".into(),
                tokenizer: "t".into(),
                token_counter: None,
                semantic_similarity: None,
                failed: vec![],
            },
            documents: docs
                .iter()
                .map(|d| DocumentScores {
                    doc_id: d.to_string(),
                    rouge,
                    novel_pct: [None; 3],
                    extraction: None,
                    summary_element_scores: None,
                })
                .collect(),
            corpus: CorpusScores {
                documents: docs.len(),
                rouge,
                novel_pct: [None; 3],
                validity_rate: None,
                lint_counts: None,
                coverage: None,
                element_scores: None,
                summary_element_scores: None,
            },
        }
    }

    #[test]
    fn identical_reports_have_zero_deltas() {
        let rows = compare(&[report("a", 0.3, &["d1"]), report("b", 0.3, &["d1"])], "a").unwrap();
        assert!(rows.iter().all(|r| r.delta_rouge_l == 0.0 && r.delta_rouge1 == 0.0));
        assert_eq!(rows[0].system, "a");
    }

    #[test]
    fn delta_matches_printed_points() {
        let rows = compare(&[report("base", 0.2542, &["d"]), report("sys", 0.3019, &["d"])], "base").unwrap();
        assert_eq!(rows[0].system, "sys");
        assert_eq!(rows[0].rouge_l, 30.19);
        assert_eq!(rows[0].delta_rouge_l, 4.77);
        assert!(rows[1].is_baseline);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            compare(&[report("a", 0.1, &["d1"]), report("b", 0.1, &["d2"])], "a"),
            Err(PipelineError::DocSetMismatch(_))
        ));
        assert!(matches!(
            compare(&[report("a", 0.1, &["d"]), report("b", 0.1, &["d"])], "zzz"),
            Err(PipelineError::UnknownBaseline(_))
        ));
        assert!(matches!(compare(&[report("a", 0.1, &["d"])], "a"), Err(PipelineError::TooFewReports)));
    }
}
