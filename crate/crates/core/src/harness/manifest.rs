use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::Category;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: malformed row: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("line {line}: duplicate utterance id {id:?} (first seen on line {first})")]
    DuplicateId { line: usize, id: String, first: usize },
    #[error("line {line}: unknown category {value:?}, expected one of DAC, SN, SS, SW")]
    UnknownCategory { line: usize, value: String },
    #[error("line {line}: utterance {id:?} has neither audio_path nor nbest_path")]
    MissingSource { line: usize, id: String },
}

/// One utterance of a JSON Lines manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub utterance_id: String,
    #[serde(default)]
    pub audio_path: Option<PathBuf>,
    pub category: Category,
    pub transcript_raw: String,
    #[serde(default)]
    pub nbest_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// 1-based line in the manifest file.
    pub line: usize,
    pub row: ManifestRow,
}

/// Rows in file order plus the directory relative paths resolve against.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub base_dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn rows(&self) -> impl Iterator<Item = &ManifestRow> {
        self.entries.iter().map(|e| &e.row)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn find(&self, utterance_id: &str) -> Option<&ManifestRow> {
        self.rows().find(|r| r.utterance_id == utterance_id)
    }

    /// Serializes the rows back to JSON Lines.
    pub fn to_jsonl(&self) -> String {
        self.rows()
            .map(|r| serde_json::to_string(r).expect("manifest rows serialize") + "\n")
            .collect()
    }
}

#[derive(Deserialize)]
struct RawRow {
    utterance_id: String,
    #[serde(default)]
    audio_path: Option<PathBuf>,
    category: String,
    transcript_raw: String,
    #[serde(default)]
    nbest_path: Option<PathBuf>,
}

/// Parses manifest text; `base_dir` anchors relative paths.
pub fn parse_manifest(text: &str, base_dir: impl Into<PathBuf>) -> Result<Manifest, ManifestError> {
    let mut entries = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        if raw_line.trim().is_empty() {
            continue;
        }
        let raw: RawRow = serde_json::from_str(raw_line).map_err(|e| ManifestError::MalformedRow {
            line,
            message: e.to_string(),
        })?;
        let category = raw.category.parse::<Category>().map_err(|_| ManifestError::UnknownCategory {
            line,
            value: raw.category.clone(),
        })?;
        if raw.utterance_id.is_empty() {
            return Err(ManifestError::MalformedRow {
                line,
                message: "utterance_id is empty".into(),
            });
        }
        if raw.audio_path.is_none() && raw.nbest_path.is_none() {
            return Err(ManifestError::MissingSource {
                line,
                id: raw.utterance_id,
            });
        }
        if let Some(&first) = seen.get(&raw.utterance_id) {
            return Err(ManifestError::DuplicateId {
                line,
                id: raw.utterance_id,
                first,
            });
        }
        seen.insert(raw.utterance_id.clone(), line);
        entries.push(ManifestEntry {
            line,
            row: ManifestRow {
                utterance_id: raw.utterance_id,
                audio_path: raw.audio_path,
                category,
                transcript_raw: raw.transcript_raw,
                nbest_path: raw.nbest_path,
            },
        });
    }

    Ok(Manifest {
        base_dir: base_dir.into(),
        entries,
    })
}

/// Reads and validates a JSON Lines manifest file.
pub fn ingest_manifest(path: &Path) -> Result<Manifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|e| ManifestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&text, base_dir)
}
