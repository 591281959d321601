//! In-memory design sessions with optional JSON snapshots on disk.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use tenun_core::io::{decode_json, PatternDocument};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("no session `{0}`")]
    NotFound(String),
    #[error("stale revision {expected}, session is at {current}")]
    Stale { expected: u64, current: u64 },
    #[error(transparent)]
    Core(#[from] tenun_core::Error),
    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },
}

/// A document under edit. Timestamps are bookkeeping only and never feed a
/// computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Session {
    pub id: String,
    pub revision: u64,
    pub created_ms: u64,
    pub updated_ms: u64,
    pub document: PatternDocument,
}

#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: Mutex<HashMap<String, Session>>,
    state_dir: Option<PathBuf>,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

impl SessionStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Store backed by `dir`; existing snapshots are loaded, unreadable ones
    /// are skipped with a warning.
    pub fn with_state_dir(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        let io_err = |e: std::io::Error| StoreError::Snapshot { path: dir.clone(), message: e.to_string() };
        fs::create_dir_all(&dir).map_err(io_err)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir).map_err(io_err)? {
            let path = entry.map_err(io_err)?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            match load_snapshot(&path) {
                Ok(session) => {
                    sessions.insert(session.id.clone(), session);
                }
                Err(e) => tracing::warn!("skipping snapshot: {e}"),
            }
        }
        Ok(Self { sessions: Mutex::new(sessions), state_dir: Some(dir) })
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<String, Session>> {
        self.sessions.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    pub fn create(&self, document: PatternDocument) -> Result<Session, StoreError> {
        let now = now_ms();
        let session = Session {
            id: uuid::Uuid::new_v4().simple().to_string(),
            revision: 1,
            created_ms: now,
            updated_ms: now,
            document,
        };
        let mut sessions = self.lock();
        self.persist(&session)?;
        sessions.insert(session.id.clone(), session.clone());
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Result<Session, StoreError> {
        self.lock().get(id).cloned().ok_or_else(|| StoreError::NotFound(id.to_string()))
    }

    /// Atomic read-modify-write. With `expected` set, the update only applies
    /// when the session is still at that revision.
    pub fn update<F>(&self, id: &str, expected: Option<u64>, edit: F) -> Result<Session, StoreError>
    where
        F: FnOnce(&PatternDocument) -> tenun_core::Result<PatternDocument>,
    {
        let mut sessions = self.lock();
        let current = sessions.get(id).ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        if let Some(expected) = expected {
            if expected != current.revision {
                return Err(StoreError::Stale { expected, current: current.revision });
            }
        }
        let document = edit(&current.document)?;
        let next = Session {
            id: current.id.clone(),
            revision: current.revision + 1,
            created_ms: current.created_ms,
            updated_ms: now_ms().max(current.updated_ms),
            document,
        };
        self.persist(&next)?;
        sessions.insert(next.id.clone(), next.clone());
        Ok(next)
    }

    fn persist(&self, session: &Session) -> Result<(), StoreError> {
        let Some(dir) = &self.state_dir else {
            return Ok(());
        };
        let path = dir.join(format!("{}.json", session.id));
        let tmp = dir.join(format!(".{}.json.tmp", session.id));
        let bytes = serde_json::to_vec_pretty(session).expect("session serializes");
        fs::write(&tmp, bytes)
            .and_then(|_| fs::rename(&tmp, &path))
            .map_err(|e| StoreError::Snapshot { path, message: e.to_string() })
    }
}

fn load_snapshot(path: &Path) -> Result<Session, StoreError> {
    let snapshot_err = |message: String| StoreError::Snapshot { path: path.to_path_buf(), message };
    let bytes = fs::read(path).map_err(|e| snapshot_err(e.to_string()))?;
    let session: Session = decode_json(&bytes).map_err(|e| snapshot_err(e.to_string()))?;
    session.document.validate().map_err(|e| snapshot_err(e.to_string()))?;
    Ok(session)
}
