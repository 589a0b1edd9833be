//! JSON manifest plus header-less little-endian `f32` blobs (`F×1024`,
//! row-major), one blob per utterance, paths relative to the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Dataset, Provenance, SessionEmbedding, TaskId, TaskLayout, UtteranceEmbedding, EMBEDDING_DIM};
use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub tasks: BTreeMap<String, usize>,
    pub sessions: Vec<ManifestSession>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestSession {
    pub id: String,
    pub sss: i64,
    pub utterances: Vec<ManifestUtterance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestUtterance {
    pub task: String,
    pub index: usize,
    pub frames: usize,
    pub blob: String,
}

impl Manifest {
    pub fn layout(&self) -> Result<TaskLayout> {
        let mut counts = TaskId::ALL.map(TaskId::canonical_count);
        for (name, &count) in &self.tasks {
            let task: TaskId = name.parse()?;
            counts[task.ordinal()] = count;
        }
        TaskLayout::new(counts)
    }
}

fn read_blob(path: &Path, frames: usize) -> Result<Vec<f32>> {
    let meta = fs::metadata(path).map_err(|_| Error::MissingBlob(path.to_path_buf()))?;
    let expected = 4 * frames as u64 * EMBEDDING_DIM as u64;
    if meta.len() != expected {
        return Err(Error::BlobSize {
            path: path.to_path_buf(),
            frames,
            expected,
            actual: meta.len(),
        });
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Loads and validates a manifest and every blob it references.
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<Dataset> {
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest(e.to_string()))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::Manifest(format!("unsupported version {}", manifest.version)));
    }
    let layout = manifest.layout()?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));

    let mut sessions = Vec::with_capacity(manifest.sessions.len());
    for s in &manifest.sessions {
        let mut utterances = Vec::with_capacity(s.utterances.len());
        for u in &s.utterances {
            let task: TaskId = u.task.parse()?;
            if u.frames == 0 {
                return Err(Error::NoFrames);
            }
            let data = read_blob(&root.join(&u.blob), u.frames)?;
            utterances.push(UtteranceEmbedding::new(task, u.index, u.frames, data)?);
        }
        sessions.push(SessionEmbedding::new(s.id.clone(), s.sss, utterances)?);
    }
    Dataset::new(layout, manifest.provenance.unwrap_or_default(), sessions)
}

/// Writes `manifest.json` and a `blobs/` directory under `dir`; returns the
/// manifest path.
pub fn save_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let blob_dir = dir.join("blobs");
    fs::create_dir_all(&blob_dir).map_err(|e| Error::io(&blob_dir, e))?;

    let mut sessions = Vec::with_capacity(dataset.len());
    for (si, s) in dataset.sessions().iter().enumerate() {
        let mut utterances = Vec::with_capacity(s.utterances().len());
        for u in s.utterances() {
            let rel = format!("blobs/{si:06}_{}_{:02}.f32", u.task.name(), u.index);
            let bytes: Vec<u8> = u.frames().iter().flat_map(|v| v.to_le_bytes()).collect();
            let path = dir.join(&rel);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            utterances.push(ManifestUtterance {
                task: u.task.name().to_string(),
                index: u.index,
                frames: u.frame_count(),
                blob: rel,
            });
        }
        sessions.push(ManifestSession {
            id: s.id().to_string(),
            sss: s.sss() as i64,
            utterances,
        });
    }
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        provenance: Some(dataset.provenance()),
        tasks: TaskId::ALL
            .into_iter()
            .map(|t| (t.name().to_string(), dataset.layout().count(t)))
            .collect(),
        sessions,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
