//! Runs, evaluation, comparison and report output.
//!
//! A run processes every document independently: truncate, prompt, call the
//! backend (twice in SumCoT mode) and write the record at once. Re-running
//! the same run id skips documents that already have a successful record.

mod compare;
mod evaluate;
mod report;
mod store;

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compare::{compare, ComparisonRow};
pub use evaluate::{
    evaluate_candidates, evaluate_references, evaluate_run, CorpusScores, DocumentScores, EvalOptions,
    ExtractionScores, LintCounts, MetricReport, ReportMeta, EXTRACTION_TARGET, METRIC_TOKENIZER,
};
pub use report::{emit_comparison, emit_report, load_report_jsonl, Format};
pub use store::{encode_file_name, Manifest, RunStore, MANIFEST_VERSION};

use crate::corpus::{Corpus, Document, RefKind};
use crate::exec::{map_ordered, Execution};
use crate::gateway::{sha256_hex, Gateway, GatewayError};
use crate::prompts::{stage1_prompt, stage2_prompt, standard_prompt, PromptSet};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error("run {run_id:?} exists with a different {field}; use a new run id")]
    ConfigMismatch { run_id: String, field: &'static str },
    #[error("run {0:?} not found")]
    UnknownRun(String),
    #[error("run {0:?} has no records")]
    NoRecords(String),
    #[error("no {0} references for documents: {1}")]
    MissingReferences(RefKind, String),
    #[error("no candidate summaries for system {0:?}")]
    UnknownSystem(String),
    #[error("run mixes standard and sumcot records")]
    MixedRunModes,
    #[error("reports cover different documents: {0}")]
    DocSetMismatch(String),
    #[error("baseline {0:?} is not among the compared reports")]
    UnknownBaseline(String),
    #[error("compare needs at least two reports")]
    TooFewReports,
    #[error("unknown report format {0:?} (expected md, csv or jsonl)")]
    UnknownFormat(String),
    #[error("malformed report: {0}")]
    MalformedReport(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Standard,
    Sumcot,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Sumcot => "sumcot",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "standard" => Ok(Mode::Standard),
            "sumcot" => Ok(Mode::Sumcot),
            other => Err(format!("unknown mode {other:?} (expected standard or sumcot)")),
        }
    }
}

/// Source of record timestamps (unix seconds).
pub trait Clock: Send + Sync {
    fn now(&self) -> u64;
}

/// Always returns the same instant; keeps offline runs byte-reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedClock(pub u64);

impl Clock for FixedClock {
    fn now(&self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptDigests {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage2: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordError {
    pub stage: String,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    pub document: usize,
    pub truncated: usize,
}

/// Per-document artifacts of a run. Exactly one of `final_summary` and
/// `error` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub doc_id: String,
    pub mode: Mode,
    pub backend: String,
    pub model: String,
    pub digests: PromptDigests,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage1_completion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_summary: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<RecordError>,
    pub token_counter: String,
    pub tokens: TokenCounts,
    pub started_at: u64,
    pub finished_at: u64,
}

impl RunRecord {
    pub fn is_complete(&self) -> bool {
        self.error.is_none() && self.final_summary.is_some()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Process at most this many pending documents, then stop.
    pub limit: Option<usize>,
}

/// What a run invocation did.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub processed: usize,
    pub skipped: usize,
    pub failed: Vec<String>,
    pub pending: usize,
}

impl RunSummary {
    pub fn partial_failure(&self) -> bool {
        !self.failed.is_empty()
    }
}

/// Stable digest of the documents a run covers.
pub fn corpus_digest(corpus: &Corpus) -> String {
    let bytes = serde_json::to_vec(corpus.documents()).expect("documents serialize");
    sha256_hex(&bytes)
}

pub fn build_manifest(run_id: &str, mode: Mode, gateway: &Gateway, prompts: &PromptSet, corpus: &Corpus) -> Manifest {
    Manifest {
        version: MANIFEST_VERSION,
        run_id: run_id.to_string(),
        mode,
        backend: gateway.config().clone(),
        prompts: prompts.clone(),
        token_counter: gateway.counter().id().to_string(),
        fixtures_digest: gateway.transport_fingerprint(),
        corpus_digest: corpus_digest(corpus),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Inputs shared by every document of a run.
pub struct RunContext<'a> {
    pub corpus: &'a Corpus,
    pub gateway: &'a Gateway,
    pub prompts: &'a PromptSet,
    pub mode: Mode,
    pub run_id: &'a str,
    pub clock: &'a dyn Clock,
}

/// Runs the context's mode over the corpus, writing into `store`.
/// Per-document failures become error records; only configuration problems
/// abort.
pub fn run(ctx: &RunContext<'_>, store: &RunStore, opts: RunOptions) -> Result<RunSummary, PipelineError> {
    store.open(&build_manifest(ctx.run_id, ctx.mode, ctx.gateway, ctx.prompts, ctx.corpus))?;

    let mut pending: Vec<&Document> = Vec::new();
    let mut skipped = 0;
    for doc in ctx.corpus.documents() {
        match store.read_record(&doc.id)? {
            Some(rec) if rec.is_complete() => skipped += 1,
            _ => pending.push(doc),
        }
    }
    let total_pending = pending.len();
    if let Some(limit) = opts.limit {
        pending.truncate(limit);
    }

    let exec = Execution::Bounded(ctx.gateway.config().concurrency);
    let outcomes = map_ordered(&pending, exec, |doc| {
        let record = process_document(ctx, doc);
        store.write_record(&record).map(|_| record)
    });

    let mut summary = RunSummary {
        run_id: ctx.run_id.to_string(),
        skipped,
        pending: total_pending - pending.len(),
        ..Default::default()
    };
    for outcome in outcomes {
        let record = outcome?;
        summary.processed += 1;
        if let Some(err) = &record.error {
            log::warn!("{}: {} failed at {}: {}", ctx.run_id, record.doc_id, err.stage, err.message);
            summary.failed.push(record.doc_id);
        }
    }
    Ok(summary)
}

fn process_document(ctx: &RunContext<'_>, doc: &Document) -> RunRecord {
    let RunContext { gateway, prompts, mode, run_id, clock, .. } = *ctx;
    let started_at = clock.now();
    let truncated = gateway.truncate(doc);
    let counter = gateway.counter();
    let mut record = RunRecord {
        run_id: run_id.to_string(),
        doc_id: doc.id.clone(),
        mode,
        backend: gateway.config().name.clone(),
        model: gateway.config().model.clone(),
        digests: PromptDigests::default(),
        stage1_completion: None,
        final_summary: None,
        error: None,
        token_counter: counter.id().to_string(),
        tokens: TokenCounts { document: counter.count(&doc.text), truncated: counter.count(&truncated.text) },
        started_at,
        finished_at: started_at,
    };
    let fail = |stage: &str, kind: &str, message: String| {
        Some(RecordError { stage: stage.into(), kind: kind.into(), message })
    };

    let final_text = match mode {
        Mode::Standard => {
            let bundle = standard_prompt(&truncated, prompts);
            record.digests.standard = Some(gateway.digest(&bundle.text));
            gateway.complete(&bundle).map_err(|e| ("standard", e))
        }
        Mode::Sumcot => {
            let s1 = stage1_prompt(&truncated, prompts);
            record.digests.stage1 = Some(gateway.digest(&s1.text));
            match gateway.complete(&s1) {
                Err(e) => Err(("stage1", e)),
                Ok(answer) => {
                    record.stage1_completion = Some(answer.text.clone());
                    match stage2_prompt(&truncated, prompts, &answer.text) {
                        Err(e) => {
                            record.error = fail("stage2", "empty_answer", e.to_string());
                            record.finished_at = clock.now();
                            return record;
                        }
                        Ok(s2) => {
                            record.digests.stage2 = Some(gateway.digest(&s2.text));
                            gateway.complete(&s2).map_err(|e| ("stage2", e))
                        }
                    }
                }
            }
        }
    };
    match final_text {
        Ok(c) if !c.text.trim().is_empty() => record.final_summary = Some(c.text.trim().to_string()),
        Ok(_) => {
            let stage = if mode == Mode::Standard { "standard" } else { "stage2" };
            record.error = fail(stage, "empty_completion", "backend returned an empty summary".into());
        }
        Err((stage, e)) => record.error = fail(stage, e.kind(), e.to_string()),
    }
    record.finished_at = clock.now();
    record
}
