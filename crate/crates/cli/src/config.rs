use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sumcot::corpus::{load_adjudications, Corpus};
use sumcot::gateway::BackendConfig;
use sumcot::metrics::{Adjudications, Matcher};
use sumcot::prompts::PromptSet;

/// Contents of a `sumcot.toml`. Relative paths resolve against the file's
/// directory. The API credential is never stored here: a backend only names
/// the environment variable that holds it.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Corpus directory (documents/references/candidates .jsonl).
    #[serde(default = "default_data")]
    pub data: PathBuf,
    #[serde(default = "default_runs")]
    pub runs_dir: PathBuf,
    #[serde(default = "default_cache")]
    pub cache_dir: PathBuf,
    #[serde(default)]
    pub matcher: MatcherConfig,
    /// Prompt string overrides, keyed like `q1` or `p_prime_multi`.
    #[serde(default)]
    pub prompts: BTreeMap<String, String>,
    #[serde(default, rename = "backend")]
    pub backends: Vec<BackendConfig>,
    #[serde(skip)]
    base: PathBuf,
}

fn default_data() -> PathBuf {
    ".".into()
}
fn default_runs() -> PathBuf {
    "runs".into()
}
fn default_cache() -> PathBuf {
    "cache".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatcherConfig {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    pub adjudications: Option<PathBuf>,
}

fn default_mode() -> String {
    "containment".into()
}
fn default_threshold() -> f64 {
    0.6
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig { mode: default_mode(), threshold: default_threshold(), adjudications: None }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Config = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Defaults for running without a config file; paths resolve against
    /// the working directory.
    pub fn empty() -> Self {
        Config {
            data: default_data(),
            runs_dir: default_runs(),
            cache_dir: default_cache(),
            matcher: MatcherConfig::default(),
            prompts: BTreeMap::new(),
            backends: Vec::new(),
            base: PathBuf::new(),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }

    pub fn base_dir(&self) -> &Path {
        &self.base
    }

    pub fn backend(&self, name: &str) -> Result<BackendConfig> {
        match self.backends.iter().find(|b| b.name == name) {
            Some(b) => Ok(b.clone()),
            None => {
                let known: Vec<&str> = self.backends.iter().map(|b| b.name.as_str()).collect();
                bail!("no backend named {name:?} in config (known: {})", known.join(", "))
            }
        }
    }

    pub fn prompt_set(&self) -> Result<PromptSet> {
        Ok(PromptSet::default().with_overrides(&self.prompts)?)
    }

    /// Builds the matcher from a spec string (`exact`, `containment`,
    /// `containment:0.5`, `adjudicated`) or, without one, from the config.
    pub fn matcher(&self, spec: Option<&str>, adjudications: Option<&Path>, corpus: &Corpus) -> Result<Matcher> {
        let (mode, threshold) = match spec {
            Some(s) => match s.split_once(':') {
                Some((m, t)) => (m, t.parse::<f64>().with_context(|| format!("bad matcher threshold in {s:?}"))?),
                None => (s, self.matcher.threshold),
            },
            None => (self.matcher.mode.as_str(), self.matcher.threshold),
        };
        match mode {
            "exact" => Ok(Matcher::Exact),
            "containment" => {
                if !(threshold > 0.0 && threshold <= 1.0) {
                    bail!("containment threshold must be in (0, 1], got {threshold}");
                }
                Ok(Matcher::Containment(threshold))
            }
            "adjudicated" => {
                let path = match (adjudications, &self.matcher.adjudications) {
                    (Some(p), _) => p.to_path_buf(),
                    (None, Some(p)) => self.resolve(p),
                    (None, None) => bail!("adjudicated matcher needs an adjudications file"),
                };
                let records = load_adjudications(&path, corpus)?;
                Ok(Matcher::Adjudicated(Arc::new(Adjudications::from_records(&records))))
            }
            other => bail!("unknown matcher {other:?} (expected exact, containment[:T] or adjudicated)"),
        }
    }
}
