use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::GatewayError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub digest: String,
    pub backend: String,
    pub model: String,
    pub text: String,
}

/// One JSON file per completion named by prompt digest, plus an append-only
/// `index.jsonl`. Files are written to a temp file and renamed into place.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    index_lock: Mutex<()>,
}

fn cache_err(e: impl std::fmt::Display) -> GatewayError {
    GatewayError::Cache(e.to_string())
}

impl ResponseCache {
    pub fn open(dir: &Path) -> Result<Self, GatewayError> {
        fs::create_dir_all(dir).map_err(cache_err)?;
        Ok(ResponseCache { dir: dir.to_path_buf(), index_lock: Mutex::new(()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, digest: &str) -> PathBuf {
        self.dir.join(format!("{digest}.json"))
    }

    pub fn get(&self, digest: &str) -> Result<Option<CacheEntry>, GatewayError> {
        match fs::read(self.entry_path(digest)) {
            Ok(bytes) => match serde_json::from_slice::<CacheEntry>(&bytes) {
                Ok(e) if e.digest == digest => Ok(Some(e)),
                Ok(_) | Err(_) => {
                    log::warn!("ignoring corrupt cache entry {digest}");
                    Ok(None)
                }
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(cache_err(e)),
        }
    }

    pub fn put(&self, entry: &CacheEntry) -> Result<(), GatewayError> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(cache_err)?;
        serde_json::to_writer(&mut tmp, entry).map_err(cache_err)?;
        tmp.as_file().sync_all().map_err(cache_err)?;
        tmp.persist(self.entry_path(&entry.digest)).map_err(cache_err)?;

        let _guard = self.index_lock.lock().unwrap_or_else(|e| e.into_inner());
        let line = serde_json::json!({"digest": entry.digest, "backend": entry.backend, "model": entry.model});
        let mut index =
            OpenOptions::new().create(true).append(true).open(self.dir.join("index.jsonl")).map_err(cache_err)?;
        writeln!(index, "{line}").map_err(cache_err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::open(dir.path()).unwrap();
        assert_eq!(cache.get("abc").unwrap(), None);
        let e = CacheEntry { digest: "abc".into(), backend: "b".into(), model: "m".into(), text: "hi".into() };
        cache.put(&e).unwrap();
        assert_eq!(cache.get("abc").unwrap(), Some(e));
        let index = fs::read_to_string(dir.path().join("index.jsonl")).unwrap();
        assert_eq!(index.lines().count(), 1);
        fs::write(dir.path().join("bad.json"), "{").unwrap();
        assert_eq!(cache.get("bad").unwrap(), None);
    }
}
