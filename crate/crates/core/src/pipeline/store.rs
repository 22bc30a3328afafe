use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Mode, PipelineError, RunRecord};
use crate::gateway::BackendConfig;
use crate::prompts::PromptSet;

pub const MANIFEST_VERSION: u32 = 1;

/// Everything needed to interpret a run's numbers. Holds the name of the
/// credential variable, never its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub run_id: String,
    pub mode: Mode,
    pub backend: BackendConfig,
    pub prompts: PromptSet,
    pub token_counter: String,
    pub fixtures_digest: Option<String>,
    pub corpus_digest: String,
    pub tool_version: String,
}

impl Manifest {
    /// First differing field name, if any.
    pub fn first_difference(&self, other: &Manifest) -> Option<&'static str> {
        let checks: [(&'static str, bool); 9] = [
            ("version", self.version == other.version),
            ("run_id", self.run_id == other.run_id),
            ("mode", self.mode == other.mode),
            ("backend", self.backend == other.backend),
            ("prompts", self.prompts == other.prompts),
            ("token_counter", self.token_counter == other.token_counter),
            ("fixtures_digest", self.fixtures_digest == other.fixtures_digest),
            ("corpus_digest", self.corpus_digest == other.corpus_digest),
            ("tool_version", self.tool_version == other.tool_version),
        ];
        checks.into_iter().find(|(_, same)| !same).map(|(name, _)| name)
    }
}

/// One directory per run: `manifest.json` and `records/<doc>.json`.
#[derive(Debug, Clone)]
pub struct RunStore {
    dir: PathBuf,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Io(format!("{}: {e}", path.display()))
}

/// Percent-encodes everything but `[A-Za-z0-9._-]` so any id is a safe
/// file name.
pub fn encode_file_name(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_') || (b == b'.' && !out.is_empty()) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
    tmp.write_all(bytes).map_err(io(path))?;
    tmp.persist(path).map_err(|e| PipelineError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub(crate) fn to_pretty_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("records serialize");
    bytes.push(b'\n');
    bytes
}

impl RunStore {
    pub fn new(runs_dir: &Path, run_id: &str) -> Self {
        RunStore { dir: runs_dir.join(encode_file_name(run_id)) }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn exists(&self) -> bool {
        self.dir.join("manifest.json").exists()
    }

    fn records_dir(&self) -> PathBuf {
        self.dir.join("records")
    }

    pub fn record_path(&self, doc_id: &str) -> PathBuf {
        self.records_dir().join(format!("{}.json", encode_file_name(doc_id)))
    }

    /// Creates the run directory, or checks that an existing manifest
    /// matches.
    pub fn open(&self, manifest: &Manifest) -> Result<(), PipelineError> {
        let path = self.dir.join("manifest.json");
        if path.exists() {
            let existing = self.manifest()?;
            if let Some(field) = existing.first_difference(manifest) {
                return Err(PipelineError::ConfigMismatch { run_id: manifest.run_id.clone(), field });
            }
            return Ok(());
        }
        fs::create_dir_all(self.records_dir()).map_err(io(&self.dir))?;
        write_atomic(&path, &to_pretty_json(manifest))
    }

    pub fn manifest(&self) -> Result<Manifest, PipelineError> {
        let path = self.dir.join("manifest.json");
        let bytes = fs::read(&path).map_err(io(&path))?;
        serde_json::from_slice(&bytes).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
    }

    pub fn write_record(&self, record: &RunRecord) -> Result<(), PipelineError> {
        write_atomic(&self.record_path(&record.doc_id), &to_pretty_json(record))
    }

    pub fn read_record(&self, doc_id: &str) -> Result<Option<RunRecord>, PipelineError> {
        let path = self.record_path(doc_id);
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io(&path)(e)),
        }
    }

    /// All records, sorted by document id.
    pub fn records(&self) -> Result<Vec<RunRecord>, PipelineError> {
        let dir = self.records_dir();
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io(&dir))? {
            let path = entry.map_err(io(&dir))?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let bytes = fs::read(&path).map_err(io(&path))?;
                let rec: RunRecord = serde_json::from_slice(&bytes)
                    .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
                out.push(rec);
            }
        }
        out.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        Ok(out)
    }
}
