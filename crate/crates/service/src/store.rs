//! Flat artifact store: immutable content-addressed objects plus one JSON
//! index naming them per recording.
//!
//! Every file is written to `tmp/` first, synced, then renamed into place,
//! so readers and restarts only ever see complete files. Leftover temp
//! files are removed on open.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Env var naming a write label (`index`, `hierarchy`, …) at which the
/// process aborts after writing half of the temp file. Test hook.
pub const FAULT_INJECT_ENV: &str = "DS_FAULT_INJECT";

pub const INDEX_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt index {path}: {detail}")]
    CorruptIndex { path: PathBuf, detail: String },
    #[error("object {0} missing")]
    MissingObject(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// What a recording was ingested from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InputRef {
    Audio { path: String },
    Transcript { object: String },
    /// Marked-up turns; the plain transcript is derived from them.
    Marked { object: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordingEntry {
    pub recording_id: String,
    pub title: String,
    pub input: InputRef,
    /// Digest identifying the input content; with the config it keys jobs.
    pub input_digest: String,
    /// Object holding the pipeline config JSON.
    pub config: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<String>,
    /// Strategy label → report object.
    #[serde(default)]
    pub evaluations: BTreeMap<String, String>,
    /// Submission key of the run that produced the artifacts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job_key: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Index {
    pub schema_version: u32,
    pub recordings: BTreeMap<String, RecordingEntry>,
}

impl Default for Index {
    fn default() -> Self {
        Self { schema_version: INDEX_SCHEMA_VERSION, recordings: BTreeMap::new() }
    }
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    index: RwLock<Index>,
    writer: Mutex<()>,
    tmp_counter: AtomicU64,
}

impl Store {
    /// Opens or creates a store under `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for dir in [root.join("objects"), root.join("tmp")] {
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        let tmp = root.join("tmp");
        for entry in fs::read_dir(&tmp).map_err(io_err(&tmp))? {
            let path = entry.map_err(io_err(&tmp))?.path();
            log::info!("removing stale temp file {}", path.display());
            fs::remove_file(&path).map_err(io_err(&path))?;
        }
        let index_path = root.join("index.json");
        let index = match fs::read(&index_path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| StoreError::CorruptIndex {
                path: index_path.clone(),
                detail: e.to_string(),
            })?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Index::default(),
            Err(e) => return Err(io_err(&index_path)(e)),
        };
        Ok(Self { root, index: RwLock::new(index), writer: Mutex::new(()), tmp_counter: AtomicU64::new(0) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn object_path(&self, id: &str) -> PathBuf {
        self.root.join("objects").join(format!("{id}.json"))
    }

    /// Stores `bytes` under their SHA-256 and returns the id. Writing the
    /// same bytes twice is a no-op.
    pub fn put_object(&self, label: &str, bytes: &[u8]) -> Result<String, StoreError> {
        let id = sha256_hex(bytes);
        let path = self.object_path(&id);
        if !path.exists() {
            self.write_atomic(&path, label, bytes)?;
        }
        Ok(id)
    }

    pub fn object(&self, id: &str) -> Result<Vec<u8>, StoreError> {
        let path = self.object_path(id);
        fs::read(&path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => StoreError::MissingObject(id.to_string()),
            _ => io_err(&path)(e),
        })
    }

    pub fn index(&self) -> Index {
        self.index.read().expect("index lock").clone()
    }

    pub fn recording(&self, id: &str) -> Option<RecordingEntry> {
        self.index.read().expect("index lock").recordings.get(id).cloned()
    }

    /// Applies `f` to a copy of the index, persists it, then publishes it.
    pub fn update<R>(&self, f: impl FnOnce(&mut Index) -> R) -> Result<R, StoreError> {
        let _guard = self.writer.lock().expect("writer lock");
        let mut next = self.index();
        let out = f(&mut next);
        let bytes = serde_json::to_vec_pretty(&next).expect("index serializes");
        self.write_atomic(&self.root.join("index.json"), "index", &bytes)?;
        *self.index.write().expect("index lock") = next;
        Ok(out)
    }

    fn write_atomic(&self, target: &Path, label: &str, bytes: &[u8]) -> Result<(), StoreError> {
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = self.root.join("tmp").join(format!("{label}-{}-{n}.part", std::process::id()));
        let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
        if std::env::var(FAULT_INJECT_ENV).is_ok_and(|v| v == label) {
            let _ = f.write_all(&bytes[..bytes.len() / 2]);
            let _ = f.sync_all();
            log::error!("fault injection: aborting while writing {label}");
            std::process::abort();
        }
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        drop(f);
        fs::rename(&tmp, target).map_err(io_err(target))?;
        if let Some(dir) = target.parent() {
            // persist the rename itself
            if let Ok(d) = File::open(dir) {
                let _ = d.sync_all();
            }
        }
        Ok(())
    }
}
