use serde::{Deserialize, Serialize};

use super::{Mode, PipelineError, RunRecord, RunStore};
use crate::corpus::{Annotations, Corpus, ElementSet, RefKind};
use crate::exec::{map_ordered, Execution};
use crate::extraction::{lint_dates, lint_redundancy, parse_stage1, LintFinding, LintKind};
use crate::metrics::{
    corpus_rouge, coverage, element_pr, novel_ngram_pct, tokenize, AnnotatorPair, CoverageScores, ElementScores,
    Matcher, RougeScores,
};

/// Label of the tokenizer all text metrics use.
pub const METRIC_TOKENIZER: &str = "whitespace-lowercase-alphanumeric";

/// Annotation target under which stage-1 extractions are scored.
pub const EXTRACTION_TARGET: &str = "stage1";

pub struct EvalOptions<'a> {
    pub refs: RefKind,
    pub matcher: Matcher,
    pub annotations: Option<&'a Annotations>,
    /// Externally computed semantic-similarity score to carry along.
    pub semantic_similarity: Option<f64>,
    pub exec: Execution,
}

impl Default for EvalOptions<'_> {
    fn default() -> Self {
        EvalOptions {
            refs: RefKind::ElementAware,
            matcher: Matcher::default(),
            annotations: None,
            semantic_similarity: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportMeta {
    pub system: String,
    pub run_id: Option<String>,
    pub mode: Option<Mode>,
    pub reference_kind: RefKind,
    pub matcher: String,
    pub tokenizer: String,
    pub token_counter: Option<String>,
    pub semantic_similarity: Option<f64>,
    /// Documents whose run record carries an error.
    pub failed: Vec<String>,
}

/// Stage-1 extraction results for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionScores {
    pub valid: bool,
    pub elements: ElementSet,
    pub coverage: Option<CoverageScores>,
    pub lints: Vec<LintFinding>,
    /// Extracted elements scored against annotator source elements.
    pub element_scores: Option<ElementScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentScores {
    pub doc_id: String,
    pub rouge: RougeScores,
    /// Novel uni/bi/trigram percentage against the source.
    pub novel_pct: [Option<f64>; 3],
    pub extraction: Option<ExtractionScores>,
    /// Annotator summary elements scored against annotator source elements.
    pub summary_element_scores: Option<ElementScores>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LintCounts {
    pub date_hallucination: usize,
    pub element_redundancy: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusScores {
    pub documents: usize,
    pub rouge: RougeScores,
    pub novel_pct: [Option<f64>; 3],
    pub validity_rate: Option<f64>,
    pub lint_counts: Option<LintCounts>,
    pub coverage: Option<CoverageScores>,
    pub element_scores: Option<ElementScores>,
    pub summary_element_scores: Option<ElementScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub meta: ReportMeta,
    pub documents: Vec<DocumentScores>,
    pub corpus: CorpusScores,
}

impl MetricReport {
    pub fn doc_ids(&self) -> Vec<&str> {
        self.documents.iter().map(|d| d.doc_id.as_str()).collect()
    }
}

struct Summary<'a> {
    doc_id: &'a str,
    text: &'a str,
    stage1: Option<&'a str>,
}

/// Scores a run's final summaries against references of `opts.refs`.
pub fn evaluate_run(corpus: &Corpus, store: &RunStore, opts: &EvalOptions<'_>) -> Result<MetricReport, PipelineError> {
    if !store.exists() {
        return Err(PipelineError::UnknownRun(store.dir().display().to_string()));
    }
    let manifest = store.manifest()?;
    let records: Vec<RunRecord> = store.records()?;
    if records.is_empty() {
        return Err(PipelineError::NoRecords(manifest.run_id));
    }
    if records.iter().any(|r| r.mode != manifest.mode) {
        return Err(PipelineError::MixedRunModes);
    }
    let mut failed = Vec::new();
    let mut summaries = Vec::new();
    for r in &records {
        match (&r.final_summary, &r.error) {
            (Some(text), None) => summaries.push(Summary {
                doc_id: &r.doc_id,
                text,
                stage1: r.stage1_completion.as_deref().filter(|_| r.mode == Mode::Sumcot),
            }),
            _ => failed.push(r.doc_id.clone()),
        }
    }
    let meta = ReportMeta {
        system: manifest.run_id.clone(),
        run_id: Some(manifest.run_id.clone()),
        mode: Some(manifest.mode),
        reference_kind: opts.refs,
        matcher: opts.matcher.describe(),
        tokenizer: METRIC_TOKENIZER.into(),
        token_counter: Some(manifest.token_counter.clone()),
        semantic_similarity: opts.semantic_similarity,
        failed,
    };
    evaluate_summaries(corpus, meta, &summaries, opts)
}

/// Scores an externally produced system's candidate summaries.
pub fn evaluate_candidates(
    corpus: &Corpus,
    system: &str,
    opts: &EvalOptions<'_>,
) -> Result<MetricReport, PipelineError> {
    let summaries: Vec<Summary> =
        corpus.candidates_of(system).map(|c| Summary { doc_id: &c.doc_id, text: &c.text, stage1: None }).collect();
    if summaries.is_empty() {
        return Err(PipelineError::UnknownSystem(system.to_string()));
    }
    evaluate_summaries(corpus, plain_meta(system, opts), &summaries, opts)
}

/// Scores the references of `kind` as if they were a system's output.
pub fn evaluate_references(
    corpus: &Corpus,
    kind: RefKind,
    opts: &EvalOptions<'_>,
) -> Result<MetricReport, PipelineError> {
    let summaries: Vec<Summary> =
        corpus.references_of(kind).map(|r| Summary { doc_id: &r.doc_id, text: &r.text, stage1: None }).collect();
    if summaries.is_empty() {
        return Err(PipelineError::MissingReferences(kind, "all".into()));
    }
    evaluate_summaries(corpus, plain_meta(kind.as_str(), opts), &summaries, opts)
}

fn plain_meta(system: &str, opts: &EvalOptions<'_>) -> ReportMeta {
    ReportMeta {
        system: system.to_string(),
        run_id: None,
        mode: None,
        reference_kind: opts.refs,
        matcher: opts.matcher.describe(),
        tokenizer: METRIC_TOKENIZER.into(),
        token_counter: None,
        semantic_similarity: opts.semantic_similarity,
        failed: Vec::new(),
    }
}

fn evaluate_summaries(
    corpus: &Corpus,
    meta: ReportMeta,
    summaries: &[Summary<'_>],
    opts: &EvalOptions<'_>,
) -> Result<MetricReport, PipelineError> {
    let missing: Vec<&str> =
        summaries.iter().filter(|s| corpus.reference(s.doc_id, opts.refs).is_none()).map(|s| s.doc_id).collect();
    if !missing.is_empty() {
        return Err(PipelineError::MissingReferences(opts.refs, missing.join(", ")));
    }
    let system = meta.system.clone();
    let scored = map_ordered(summaries, opts.exec, |s| score_document(corpus, &system, s, opts));
    let mut documents = scored.into_iter().collect::<Result<Vec<_>, _>>()?;
    documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let corpus_scores = aggregate(&documents);
    Ok(MetricReport { meta, documents, corpus: corpus_scores })
}

fn score_document(
    corpus: &Corpus,
    system: &str,
    s: &Summary<'_>,
    opts: &EvalOptions<'_>,
) -> Result<DocumentScores, PipelineError> {
    let doc =
        corpus.document(s.doc_id).ok_or_else(|| crate::corpus::CorpusError::DanglingReference(s.doc_id.into()))?;
    let reference = corpus.reference(s.doc_id, opts.refs).expect("checked by caller");
    let cand = tokenize(s.text);
    let source = tokenize(&doc.text);
    let rouge = RougeScores::score(&cand, &tokenize(&reference.text));
    let novel_pct = [1, 2, 3].map(|n| novel_ngram_pct(&cand, &source, n).ok());

    let annotator_sets: Vec<_> = opts.annotations.map(|a| a.for_doc(s.doc_id).collect()).unwrap_or_default();

    let extraction = match s.stage1 {
        None => None,
        Some(raw) => {
            let ans = parse_stage1(s.doc_id, raw);
            let (cov, lints) = if ans.valid {
                let mut lints = lint_dates(&ans, doc);
                lints.extend(lint_redundancy(&ans));
                (Some(coverage(s.doc_id, &ans, s.text, &opts.matcher)?), lints)
            } else {
                (None, Vec::new())
            };
            let element_scores = if annotator_sets.is_empty() {
                None
            } else {
                let pairs: Vec<AnnotatorPair> = annotator_sets
                    .iter()
                    .map(|a| AnnotatorPair { source: &a.source_sets, summary: &ans.parsed })
                    .collect();
                Some(element_pr(s.doc_id, EXTRACTION_TARGET, &pairs, &opts.matcher)?)
            };
            Some(ExtractionScores { valid: ans.valid, elements: ans.parsed, coverage: cov, lints, element_scores })
        }
    };

    let with_summary: Vec<AnnotatorPair> = annotator_sets
        .iter()
        .filter_map(|a| a.summary_sets.get(system).map(|sum| AnnotatorPair { source: &a.source_sets, summary: sum }))
        .collect();
    let summary_element_scores =
        if with_summary.is_empty() { None } else { Some(element_pr(s.doc_id, system, &with_summary, &opts.matcher)?) };

    Ok(DocumentScores { doc_id: s.doc_id.to_string(), rouge, novel_pct, extraction, summary_element_scores })
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let vals: Vec<f64> = values.flatten().collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

fn aggregate(docs: &[DocumentScores]) -> CorpusScores {
    let rouge = corpus_rouge(&docs.iter().map(|d| d.rouge).collect::<Vec<_>>());
    let novel_pct = [0, 1, 2].map(|i| mean_opt(docs.iter().map(|d| d.novel_pct[i])));
    let extractions: Vec<&ExtractionScores> = docs.iter().filter_map(|d| d.extraction.as_ref()).collect();
    let (validity_rate, lint_counts, coverage) = if extractions.is_empty() {
        (None, None, None)
    } else {
        let valid = extractions.iter().filter(|e| e.valid).count();
        let mut counts = LintCounts::default();
        for lint in extractions.iter().flat_map(|e| &e.lints) {
            match lint.kind {
                LintKind::DateHallucination => counts.date_hallucination += 1,
                LintKind::ElementRedundancy => counts.element_redundancy += 1,
            }
        }
        let covs: Vec<CoverageScores> = extractions.iter().filter_map(|e| e.coverage).collect();
        (Some(valid as f64 / extractions.len() as f64), Some(counts), Some(CoverageScores::corpus_mean(&covs)))
    };
    let element_scores: Vec<ElementScores> = extractions.iter().filter_map(|e| e.element_scores).collect();
    let summary_scores: Vec<ElementScores> = docs.iter().filter_map(|d| d.summary_element_scores).collect();
    CorpusScores {
        documents: docs.len(),
        rouge,
        novel_pct,
        validity_rate,
        lint_counts,
        coverage,
        element_scores: (!element_scores.is_empty()).then(|| ElementScores::corpus_mean(&element_scores)),
        summary_element_scores: (!summary_scores.is_empty()).then(|| ElementScores::corpus_mean(&summary_scores)),
    }
}
