//! Documents, reference and candidate summaries, and annotator element sets.
//!
//! Every input is line-delimited JSON, one record per line. Loading
//! validates identifiers and cross references; the resulting [`Corpus`] is
//! immutable.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{normalize_element, novel_ngram_pct, split_sentences, tokenize};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord { path: PathBuf, line: usize, message: String },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("reference to unknown document {0:?}")]
    DanglingReference(String),
    #[error("unknown element category {0:?}")]
    UnknownCategory(String),
    #[error("annotator index {0} is outside 1..=3")]
    BadAnnotatorIndex(i64),
    #[error("doc {doc_id:?} annotator {annotator} target {target:?} has no {category} record")]
    MissingCategory { doc_id: String, annotator: u8, target: String, category: Category },
    #[error("no summaries of kind {0:?}")]
    EmptyKind(String),
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// Summary regime of a document's dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Style {
    /// Multi-sentence summaries (news highlights).
    #[serde(rename = "multi")]
    MultiSentence,
    /// Single-sentence summaries.
    #[serde(rename = "one")]
    OneSentence,
}

impl Style {
    pub fn as_str(self) -> &'static str {
        match self {
            Style::MultiSentence => "multi",
            Style::OneSentence => "one",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub style: Style,
}

/// Which reference set a summary belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RefKind {
    /// The original reference shipped with the dataset.
    #[serde(rename = "dataset")]
    DatasetSpecific,
    /// Expert-written reference covering the four core elements.
    #[serde(rename = "element_aware")]
    ElementAware,
}

impl RefKind {
    pub const ALL: [RefKind; 2] = [RefKind::DatasetSpecific, RefKind::ElementAware];

    pub fn as_str(self) -> &'static str {
        match self {
            RefKind::DatasetSpecific => "dataset",
            RefKind::ElementAware => "element_aware",
        }
    }
}

impl fmt::Display for RefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RefKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dataset" => Ok(RefKind::DatasetSpecific),
            "element_aware" => Ok(RefKind::ElementAware),
            other => Err(format!("unknown reference kind {other:?} (expected dataset or element_aware)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSummary {
    pub doc_id: String,
    pub kind: RefKind,
    pub text: String,
}

/// A summary produced outside this toolkit, e.g. by a fine-tuned model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSummary {
    pub doc_id: String,
    pub system: String,
    pub text: String,
}

/// Core element categories, in their fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Entity,
    Date,
    Event,
    Result,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Entity, Category::Date, Category::Event, Category::Result];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Entity => "entity",
            Category::Date => "date",
            Category::Event => "event",
            Category::Result => "result",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| CorpusError::UnknownCategory(s.to_string()))
    }
}

/// Elements per category. An empty list is an explicit "none exists".
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSet {
    pub entities: Vec<String>,
    pub dates: Vec<String>,
    pub events: Vec<String>,
    pub results: Vec<String>,
}

impl ElementSet {
    pub fn get(&self, c: Category) -> &[String] {
        match c {
            Category::Entity => &self.entities,
            Category::Date => &self.dates,
            Category::Event => &self.events,
            Category::Result => &self.results,
        }
    }

    pub fn get_mut(&mut self, c: Category) -> &mut Vec<String> {
        match c {
            Category::Entity => &mut self.entities,
            Category::Date => &mut self.dates,
            Category::Event => &mut self.events,
            Category::Result => &mut self.results,
        }
    }

    pub fn is_empty(&self) -> bool {
        Category::ALL.iter().all(|&c| self.get(c).is_empty())
    }

    /// Drops entries that repeat an earlier one under element
    /// normalization. Returns how many were dropped.
    pub fn dedup(&mut self) -> usize {
        Category::ALL
            .into_iter()
            .map(|c| {
                let list = self.get_mut(c);
                let before = list.len();
                let mut seen = HashSet::new();
                list.retain(|e| seen.insert(normalize_element(e)));
                before - list.len()
            })
            .sum()
    }
}

/// Target label for the source-document element set.
pub const SOURCE_TARGET: &str = "source";

/// One annotator's element sets for a document: A over the source and A'
/// over each annotated summary (keyed by reference kind or system label).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatorElementSets {
    pub doc_id: String,
    pub annotator: u8,
    pub source_sets: ElementSet,
    pub summary_sets: BTreeMap<String, ElementSet>,
}

/// Loaded annotations plus the number of duplicate elements dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Annotations {
    pub sets: Vec<AnnotatorElementSets>,
    pub duplicates_dropped: usize,
}

impl Annotations {
    pub fn for_doc<'a>(&'a self, doc_id: &'a str) -> impl Iterator<Item = &'a AnnotatorElementSets> + 'a {
        self.sets.iter().filter(move |s| s.doc_id == doc_id)
    }

    pub fn doc_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.sets.iter().map(|s| s.doc_id.as_str()).collect();
        ids.dedup();
        ids
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationRow {
    doc_id: String,
    annotator: i64,
    target: String,
    category: String,
    elements: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    NoMatch,
}

/// A human decision on whether an element is present in a target summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdjudicationRecord {
    pub doc_id: String,
    pub category: Category,
    pub element: String,
    pub target: String,
    pub verdict: Verdict,
}

/// Per-kind record counts returned by a load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CorpusCounts {
    pub documents: usize,
    pub dataset_refs: usize,
    pub element_aware_refs: usize,
    pub candidates: usize,
}

/// File locations for a corpus. Reference and candidate files are optional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub documents: PathBuf,
    pub references: Option<PathBuf>,
    pub candidates: Option<PathBuf>,
}

impl CorpusPaths {
    /// `documents.jsonl`, `references.jsonl` and `candidates.jsonl` inside
    /// `dir`; the latter two only if present.
    pub fn in_dir(dir: &Path) -> Self {
        let opt = |name: &str| Some(dir.join(name)).filter(|p| p.exists());
        CorpusPaths {
            documents: dir.join("documents.jsonl"),
            references: opt("references.jsonl"),
            candidates: opt("candidates.jsonl"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    index: HashMap<String, usize>,
    references: Vec<ReferenceSummary>,
    candidates: Vec<CandidateSummary>,
}

impl Corpus {
    /// Builds a corpus from in-memory records with the same validation as
    /// the file loaders.
    pub fn from_parts(
        documents: Vec<Document>,
        references: Vec<ReferenceSummary>,
        candidates: Vec<CandidateSummary>,
    ) -> Result<Self> {
        let mut corpus = Corpus::default();
        for doc in documents {
            corpus.push_document(doc)?;
        }
        let mut seen_refs = HashSet::new();
        for r in references {
            corpus.require_doc(&r.doc_id)?;
            if !seen_refs.insert((r.doc_id.clone(), r.kind)) {
                return Err(CorpusError::DuplicateId(format!("{}/{}", r.doc_id, r.kind)));
            }
            corpus.references.push(r);
        }
        let mut seen_cands = HashSet::new();
        for c in candidates {
            corpus.require_doc(&c.doc_id)?;
            if !seen_cands.insert((c.doc_id.clone(), c.system.clone())) {
                return Err(CorpusError::DuplicateId(format!("{}/{}", c.doc_id, c.system)));
            }
            corpus.candidates.push(c);
        }
        Ok(corpus)
    }

    fn push_document(&mut self, doc: Document) -> Result<()> {
        if self.index.contains_key(&doc.id) {
            return Err(CorpusError::DuplicateId(doc.id));
        }
        self.index.insert(doc.id.clone(), self.documents.len());
        self.documents.push(doc);
        Ok(())
    }

    fn require_doc(&self, id: &str) -> Result<()> {
        if self.index.contains_key(id) {
            Ok(())
        } else {
            Err(CorpusError::DanglingReference(id.to_string()))
        }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.documents[i])
    }

    pub fn references(&self) -> &[ReferenceSummary] {
        &self.references
    }

    pub fn candidates(&self) -> &[CandidateSummary] {
        &self.candidates
    }

    pub fn reference(&self, doc_id: &str, kind: RefKind) -> Option<&ReferenceSummary> {
        self.references.iter().find(|r| r.doc_id == doc_id && r.kind == kind)
    }

    pub fn references_of(&self, kind: RefKind) -> impl Iterator<Item = &ReferenceSummary> {
        self.references.iter().filter(move |r| r.kind == kind)
    }

    pub fn candidates_of<'a>(&'a self, system: &'a str) -> impl Iterator<Item = &'a CandidateSummary> + 'a {
        self.candidates.iter().filter(move |c| c.system == system)
    }

    /// Distinct candidate system labels, sorted.
    pub fn systems(&self) -> Vec<&str> {
        let mut s: Vec<&str> = self.candidates.iter().map(|c| c.system.as_str()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn counts(&self) -> CorpusCounts {
        CorpusCounts {
            documents: self.documents.len(),
            dataset_refs: self.references_of(RefKind::DatasetSpecific).count(),
            element_aware_refs: self.references_of(RefKind::ElementAware).count(),
            candidates: self.candidates.len(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

/// Reads line-delimited JSON; blank lines are skipped. Returns each record
/// with its 1-based line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map(|v| (i + 1, v)).map_err(|e| CorpusError::MalformedRecord {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r)
            .map_err(|e| CorpusError::Io { path: path.to_path_buf(), source: e.into() })?;
        buf.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(&buf).map_err(io_err(path))
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::MalformedRecord { path: path.to_path_buf(), line, message: message.into() }
}

fn check_text(path: &Path, line: usize, field: &str, text: &str) -> Result<()> {
    if text.split_whitespace().next().is_none() {
        return Err(malformed(path, line, format!("{field} is empty")));
    }
    Ok(())
}

/// Loads documents, references and candidates and validates them.
pub fn load_corpus(paths: &CorpusPaths) -> Result<Corpus> {
    let mut documents = Vec::new();
    for (line, doc) in read_jsonl::<Document>(&paths.documents)? {
        if doc.id.trim().is_empty() {
            return Err(malformed(&paths.documents, line, "id is empty"));
        }
        check_text(&paths.documents, line, "text", &doc.text)?;
        documents.push(doc);
    }
    let mut references = Vec::new();
    if let Some(p) = &paths.references {
        for (line, r) in read_jsonl::<ReferenceSummary>(p)? {
            check_text(p, line, "text", &r.text)?;
            references.push(r);
        }
    }
    let mut candidates = Vec::new();
    if let Some(p) = &paths.candidates {
        for (line, c) in read_jsonl::<CandidateSummary>(p)? {
            if c.system.trim().is_empty() {
                return Err(malformed(p, line, "system is empty"));
            }
            check_text(p, line, "text", &c.text)?;
            candidates.push(c);
        }
    }
    let corpus = Corpus::from_parts(documents, references, candidates)?;
    log::info!("loaded corpus: {:?}", corpus.counts());
    Ok(corpus)
}

/// Writes the corpus back in the documented layout.
pub fn write_corpus(corpus: &Corpus, paths: &CorpusPaths) -> Result<()> {
    write_jsonl(&paths.documents, &corpus.documents)?;
    if let Some(p) = &paths.references {
        write_jsonl(p, &corpus.references)?;
    }
    if let Some(p) = &paths.candidates {
        write_jsonl(p, &corpus.candidates)?;
    }
    Ok(())
}

/// Loads annotator element sets. Every (doc, annotator, target) group must
/// carry all four categories; duplicates within a category are dropped and
/// counted.
pub fn load_annotations(path: &Path, corpus: &Corpus) -> Result<Annotations> {
    type Group = BTreeMap<Category, Vec<String>>;
    let mut groups: BTreeMap<(String, u8), BTreeMap<String, Group>> = BTreeMap::new();
    let mut order: Vec<(String, u8)> = Vec::new();
    for (line, row) in read_jsonl::<AnnotationRow>(path)? {
        corpus.require_doc(&row.doc_id)?;
        let category: Category = row.category.parse()?;
        if !(1..=3).contains(&row.annotator) {
            return Err(CorpusError::BadAnnotatorIndex(row.annotator));
        }
        if row.target.trim().is_empty() {
            return Err(malformed(path, line, "target is empty"));
        }
        if row.elements.iter().any(|e| e.trim().is_empty()) {
            return Err(malformed(path, line, "empty element"));
        }
        let key = (row.doc_id.clone(), row.annotator as u8);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        let slot = groups.entry(key).or_default().entry(row.target.clone()).or_default();
        if slot.insert(category, row.elements).is_some() {
            return Err(CorpusError::DuplicateId(format!(
                "{}/annotator {}/{}/{}",
                row.doc_id, row.annotator, row.target, category
            )));
        }
    }

    let mut out = Annotations::default();
    for key in order {
        let targets = groups.remove(&key).unwrap_or_default();
        let (doc_id, annotator) = key;
        let mut source_sets = None;
        let mut summary_sets = BTreeMap::new();
        for (target, mut group) in targets {
            let mut set = ElementSet::default();
            for c in Category::ALL {
                let list = group.remove(&c).ok_or_else(|| CorpusError::MissingCategory {
                    doc_id: doc_id.clone(),
                    annotator,
                    target: target.clone(),
                    category: c,
                })?;
                *set.get_mut(c) = list;
            }
            out.duplicates_dropped += set.dedup();
            if target == SOURCE_TARGET {
                source_sets = Some(set);
            } else {
                summary_sets.insert(target, set);
            }
        }
        let source_sets = source_sets.ok_or_else(|| CorpusError::MissingCategory {
            doc_id: doc_id.clone(),
            annotator,
            target: SOURCE_TARGET.to_string(),
            category: Category::Entity,
        })?;
        out.sets.push(AnnotatorElementSets { doc_id, annotator, source_sets, summary_sets });
    }
    if out.duplicates_dropped > 0 {
        log::warn!("{}: dropped {} duplicate elements", path.display(), out.duplicates_dropped);
    }
    Ok(out)
}

/// Writes annotations with every category key present, in a fixed order.
pub fn write_annotations(path: &Path, annotations: &Annotations) -> Result<()> {
    let mut rows = Vec::new();
    for s in &annotations.sets {
        let targets = std::iter::once((SOURCE_TARGET, &s.source_sets))
            .chain(s.summary_sets.iter().map(|(t, set)| (t.as_str(), set)));
        for (target, set) in targets {
            for c in Category::ALL {
                rows.push(AnnotationRow {
                    doc_id: s.doc_id.clone(),
                    annotator: s.annotator as i64,
                    target: target.to_string(),
                    category: c.as_str().to_string(),
                    elements: set.get(c).to_vec(),
                });
            }
        }
    }
    write_jsonl(path, &rows)
}

pub fn load_adjudications(path: &Path, corpus: &Corpus) -> Result<Vec<AdjudicationRecord>> {
    let rows = read_jsonl::<AdjudicationRecord>(path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (_, r) in rows {
        corpus.require_doc(&r.doc_id)?;
        out.push(r);
    }
    Ok(out)
}

/// Length and abstractiveness statistics for one kind of summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BundleStats {
    pub kind: String,
    pub summaries: usize,
    pub avg_words: f64,
    pub avg_sentences: f64,
    /// Mean novel uni/bi/trigram percentage; summaries too short for an
    /// order are skipped for that order.
    pub novel_pct: [Option<f64>; 3],
}

/// Statistics over (summary, source) pairs under a label.
pub fn summary_stats(kind: &str, pairs: &[(&str, &str)]) -> Result<BundleStats> {
    if pairs.is_empty() {
        return Err(CorpusError::EmptyKind(kind.to_string()));
    }
    let n = pairs.len() as f64;
    let avg_words = pairs.iter().map(|(s, _)| tokenize(s).len() as f64).sum::<f64>() / n;
    let avg_sentences = pairs.iter().map(|(s, _)| split_sentences(s).len() as f64).sum::<f64>() / n;
    let novel_pct = [1, 2, 3].map(|order| {
        let vals: Vec<f64> =
            pairs.iter().filter_map(|(s, src)| novel_ngram_pct(&tokenize(s), &tokenize(src), order).ok()).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    });
    Ok(BundleStats { kind: kind.to_string(), summaries: pairs.len(), avg_words, avg_sentences, novel_pct })
}

/// Statistics for the references of one kind.
pub fn bundle_stats(corpus: &Corpus, kind: RefKind) -> Result<BundleStats> {
    let pairs: Vec<(&str, &str)> = corpus
        .references_of(kind)
        .filter_map(|r| corpus.document(&r.doc_id).map(|d| (r.text.as_str(), d.text.as_str())))
        .collect();
    summary_stats(kind.as_str(), &pairs)
}
