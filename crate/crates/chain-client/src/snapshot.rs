//! Content-addressed request/response store. Recording appends every pair
//! to a line-delimited file; replay serves from memory and touches no
//! network. A stored pair is immutable: re-recording the same request with
//! a different response is a conflict, never an overwrite.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SNAPSHOT_FORMAT: &str = "provider-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Which backend a request goes to. Part of the request identity: the
/// same method name on different services is a different request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Service {
    Rpc,
    Explorer,
    Sigdb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestKey {
    pub service: Service,
    pub method: String,
    pub params: serde_json::Value,
}

impl RequestKey {
    pub fn new(service: Service, method: impl Into<String>, params: serde_json::Value) -> RequestKey {
        RequestKey { service, method: method.into(), params }
    }

    /// sha-256 of the canonical JSON rendering. serde_json maps are
    /// BTree-ordered, so equal requests always digest equally.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("request key is always serializable");
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SnapshotLine {
    key: String,
    request: RequestKey,
    response: serde_json::Value,
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotHeader {
    format: String,
    version: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("snapshot is {found}, this build reads {expected}")]
    VersionMismatch { found: String, expected: String },
    #[error("conflicting re-record of {method} (key {key})")]
    Conflict { method: String, key: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// In-memory map plus an optional backing file that recording appends to.
#[derive(Debug, Default)]
pub struct SnapshotStore {
    path: Option<PathBuf>,
    entries: HashMap<String, SnapshotLine>,
}

impl SnapshotStore {
    /// Ephemeral store, for tests and for building fixtures in code.
    pub fn in_memory() -> SnapshotStore {
        SnapshotStore::default()
    }

    /// Load an existing snapshot file (replay).
    pub fn load(path: impl AsRef<Path>) -> Result<SnapshotStore, SnapshotError> {
        let path = path.as_ref().to_path_buf();
        let reader = BufReader::new(std::fs::File::open(&path)?);
        let mut store = SnapshotStore { path: Some(path), entries: HashMap::new() };
        let mut lines = reader.lines();
        let header_line = lines.next().ok_or(SnapshotError::Parse {
            line: 1,
            message: "empty snapshot file".into(),
        })??;
        let header: SnapshotHeader = serde_json::from_str(&header_line)
            .map_err(|e| SnapshotError::Parse { line: 1, message: e.to_string() })?;
        if header.format != SNAPSHOT_FORMAT || header.version != SNAPSHOT_VERSION {
            return Err(SnapshotError::VersionMismatch {
                found: format!("{} v{}", header.format, header.version),
                expected: format!("{SNAPSHOT_FORMAT} v{SNAPSHOT_VERSION}"),
            });
        }
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: SnapshotLine = serde_json::from_str(&line)
                .map_err(|e| SnapshotError::Parse { line: i + 2, message: e.to_string() })?;
            if entry.request.digest() != entry.key {
                return Err(SnapshotError::Parse {
                    line: i + 2,
                    message: "stored key does not match request digest".into(),
                });
            }
            store.insert_checked(entry)?;
        }
        Ok(store)
    }

    /// Open for recording: loads the file when it exists, creates it with
    /// a header otherwise.
    pub fn open_recording(path: impl AsRef<Path>) -> Result<SnapshotStore, SnapshotError> {
        let path = path.as_ref();
        if path.exists() {
            SnapshotStore::load(path)
        } else {
            let mut f = std::fs::File::create(path)?;
            let header =
                SnapshotHeader { format: SNAPSHOT_FORMAT.into(), version: SNAPSHOT_VERSION };
            writeln!(f, "{}", serde_json::to_string(&header).expect("header serializes"))?;
            Ok(SnapshotStore { path: Some(path.to_path_buf()), entries: HashMap::new() })
        }
    }

    pub fn get(&self, key: &RequestKey) -> Option<&serde_json::Value> {
        self.entries.get(&key.digest()).map(|e| &e.response)
    }

    /// Store a pair; appends to the backing file when present. Recording
    /// an identical pair again is a no-op, a differing response is a
    /// conflict error.
    pub fn record(
        &mut self,
        key: RequestKey,
        response: serde_json::Value,
    ) -> Result<(), SnapshotError> {
        let digest = key.digest();
        if let Some(existing) = self.entries.get(&digest) {
            if existing.response == response {
                return Ok(());
            }
            return Err(SnapshotError::Conflict { method: key.method, key: digest });
        }
        let line = SnapshotLine { key: digest.clone(), request: key, response };
        if let Some(path) = &self.path {
            let mut f = std::fs::OpenOptions::new().append(true).open(path)?;
            writeln!(f, "{}", serde_json::to_string(&line).expect("snapshot line serializes"))?;
        }
        self.entries.insert(digest, line);
        Ok(())
    }

    fn insert_checked(&mut self, entry: SnapshotLine) -> Result<(), SnapshotError> {
        if let Some(existing) = self.entries.get(&entry.key) {
            if existing.response != entry.response {
                return Err(SnapshotError::Conflict {
                    method: entry.request.method,
                    key: entry.key,
                });
            }
            return Ok(());
        }
        self.entries.insert(entry.key.clone(), entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn key(method: &str, n: u64) -> RequestKey {
        RequestKey::new(Service::Rpc, method, json!([n]))
    }

    #[test]
    fn digest_ignores_nothing_and_collides_never_on_fixture() {
        let a = key("eth_getBlockByNumber", 1);
        let b = key("eth_getBlockByNumber", 2);
        let c = RequestKey::new(Service::Explorer, "eth_getBlockByNumber", json!([1]));
        assert_eq!(a.digest(), key("eth_getBlockByNumber", 1).digest());
        assert_ne!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn file_round_trip_and_append() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.jsonl");
        let mut store = SnapshotStore::open_recording(&path).unwrap();
        store.record(key("m", 1), json!({"a": 1})).unwrap();
        store.record(key("m", 2), json!({"a": 2})).unwrap();
        drop(store);

        let mut again = SnapshotStore::load(&path).unwrap();
        assert_eq!(again.len(), 2);
        assert_eq!(again.get(&key("m", 1)), Some(&json!({"a": 1})));
        // appending through a reopened store keeps earlier entries
        again.record(key("m", 3), json!({"a": 3})).unwrap();
        drop(again);
        let third = SnapshotStore::load(&path).unwrap();
        assert_eq!(third.len(), 3);
    }

    #[test]
    fn re_recording_same_pair_is_idempotent_but_mutation_is_refused() {
        let mut store = SnapshotStore::in_memory();
        store.record(key("m", 1), json!("x")).unwrap();
        store.record(key("m", 1), json!("x")).unwrap();
        assert_eq!(store.len(), 1);
        let err = store.record(key("m", 1), json!("y")).unwrap_err();
        assert!(matches!(err, SnapshotError::Conflict { .. }));
        assert_eq!(store.get(&key("m", 1)), Some(&json!("x")));
    }

    #[test]
    fn wrong_version_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.jsonl");
        std::fs::write(&path, "{\"format\":\"provider-snapshot\",\"version\":99}\n").unwrap();
        assert!(matches!(
            SnapshotStore::load(&path),
            Err(SnapshotError::VersionMismatch { .. })
        ));
    }

    #[test]
    fn tampered_key_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.jsonl");
        let mut store = SnapshotStore::open_recording(&path).unwrap();
        store.record(key("m", 1), json!("x")).unwrap();
        drop(store);
        let text = std::fs::read_to_string(&path).unwrap();
        let tampered = text.replace("\"params\":[1]", "\"params\":[7]");
        assert_ne!(text, tampered);
        std::fs::write(&path, tampered).unwrap();
        assert!(matches!(SnapshotStore::load(&path), Err(SnapshotError::Parse { .. })));
    }
}
