//! Versioned, hash-checked checkpoints of the engine state.

use std::io::Write;
use std::path::{Path, PathBuf};

use adept_core::engine::EngineState;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupt checkpoint {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("checkpoint {path} belongs to a different run configuration")]
    ConfigMismatch { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub run_hash: String,
    pub content_hash: String,
    pub state: EngineState,
}

fn content_hash(state: &EngineState) -> String {
    let text = serde_json::to_string(state).expect("engine state serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Writes atomically: a sibling temporary file is renamed over `path`.
pub fn save(path: &Path, state: &EngineState, run_hash: &str) -> Result<(), CheckpointError> {
    let io = |source| CheckpointError::Io { path: path.to_path_buf(), source };
    let cp = Checkpoint { version: SCHEMA_VERSION, run_hash: run_hash.to_string(), content_hash: content_hash(state), state: state.clone() };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    serde_json::to_writer(&mut tmp, &cp).map_err(|e| io(e.into()))?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Reads a checkpoint, checking schema version, content hash and, when
/// given, the run configuration hash.
pub fn load(path: &Path, run_hash: Option<&str>) -> Result<EngineState, CheckpointError> {
    let text = std::fs::read_to_string(path).map_err(|source| CheckpointError::Io { path: path.to_path_buf(), source })?;
    let corrupt = |reason: String| CheckpointError::Corrupt { path: path.to_path_buf(), reason };
    let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    if cp.version != SCHEMA_VERSION {
        return Err(corrupt(format!("schema version {} (expected {SCHEMA_VERSION})", cp.version)));
    }
    if content_hash(&cp.state) != cp.content_hash {
        return Err(corrupt("content hash mismatch".into()));
    }
    if run_hash.is_some_and(|h| h != cp.run_hash) {
        return Err(CheckpointError::ConfigMismatch { path: path.to_path_buf() });
    }
    Ok(cp.state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use adept_core::llm::BudgetLedger;
    use adept_core::selection::AnnealState;
    use adept_core::tree::SearchTree;

    fn state() -> EngineState {
        EngineState {
            tree: SearchTree::new(),
            anneal: AnnealState::new(0.1 + 0.2, 0.95, 0.2, 3),
            ledger: BudgetLedger::new(60),
            generation: 3,
            best: None,
            generations: Vec::new(),
            selections: Vec::new(),
            backend_state: serde_json::json!([1, 2]),
            finished: false,
        }
    }

    #[test]
    fn round_trip_and_tamper_detection() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt.json");
        save(&path, &state(), "h").unwrap();
        assert_eq!(load(&path, Some("h")).unwrap(), state());
        assert!(matches!(load(&path, Some("other")), Err(CheckpointError::ConfigMismatch { .. })));

        let text = std::fs::read_to_string(&path).unwrap().replace("\"generation\":3", "\"generation\":4");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(load(&path, None), Err(CheckpointError::Corrupt { .. })));

        std::fs::write(&path, "{").unwrap();
        assert!(matches!(load(&path, None), Err(CheckpointError::Corrupt { .. })));
    }
}
