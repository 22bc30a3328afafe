//! Two-stage summary chain-of-thought (SumCoT) pipeline with an
//! element-aware evaluation suite.
//!
//! The crate is organised the way a run flows:
//!
//! - [`corpus`] loads documents, references, candidate summaries and
//!   annotator element sets from line-delimited JSON.
//! - [`prompts`] assembles the standard zero-shot prompt and the two SumCoT
//!   stage prompts.
//! - [`gateway`] talks to completion backends (HTTP or the offline mock)
//!   with truncation, retries, rate limiting and a response cache.
//! - [`extraction`] parses Stage-1 answers into element sets and lints them.
//! - [`metrics`] holds tokenization, ROUGE-1/2/L, novel n-grams, element
//!   precision/recall, coverage and Likert aggregation.
//! - [`pipeline`] orchestrates runs, persists artifacts, evaluates and
//!   compares systems, and renders reports.
//!
//! Batch work (per-document scoring, the run worker pool) goes through
//! [`exec`], which uses rayon when the `parallel` feature is enabled and
//! falls back to plain iteration otherwise.

pub mod corpus;
pub mod exec;
pub mod extraction;
pub mod gateway;
pub mod metrics;
pub mod pipeline;
pub mod prompts;

pub use corpus::{Category, Corpus, Document, ElementSet, RefKind, Style};
pub use exec::Execution;
pub use metrics::{tokenize, Prf, TokenSeq};
