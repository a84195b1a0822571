//! Structure files, dataset manifests and run configuration.

mod config;
pub mod elements;
mod graph;
mod manifest;
mod xyz;

use std::path::Path;

pub use config::{
    load_config, parse_config, AblationMode, ConfigError, RunConfig, Schedule, MAX_DEGREE,
    MAX_ROOTS,
};
pub use graph::{Graph3D, GraphError, MIN_ATOM_SEPARATION};
pub use manifest::{load_manifest, parse_manifest, ManifestEntry, ManifestError};
pub use xyz::{parse_xyz, write_xyz, XyzError, XyzErrorKind};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Xyz {
        path: String,
        #[source]
        source: XyzError,
    },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("{path}: expected exactly one frame, found {frames}")]
    FrameCount { path: String, frames: usize },
    #[error("{path}: {source}")]
    Graph {
        path: String,
        #[source]
        source: GraphError,
    },
}

/// Read an XYZ file of one or more frames.
pub fn read_xyz_file(path: impl AsRef<Path>) -> Result<Vec<Graph3D>, DatasetError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_xyz(&text).map_err(|source| DatasetError::Xyz { path: shown, source })
}

/// Load a dataset either from a manifest (`.jsonl`/`.manifest`) whose
/// records each name a single-frame XYZ file, or from a multi-frame XYZ file
/// whose comment lines carry the targets.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<Graph3D>, DatasetError> {
    let path = path.as_ref();
    let is_manifest = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "manifest" | "json")
    );
    if !is_manifest {
        return read_xyz_file(path);
    }
    let mut graphs = Vec::new();
    for entry in load_manifest(path)? {
        let shown = entry.path.display().to_string();
        let mut frames = read_xyz_file(&entry.path)?;
        if frames.len() != 1 {
            return Err(DatasetError::FrameCount { path: shown, frames: frames.len() });
        }
        let stem = entry
            .path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let graph = frames
            .remove(0)
            .with_id(stem)
            .with_target(entry.target)
            .map_err(|source| DatasetError::Graph { path: shown, source })?;
        graphs.push(graph);
    }
    Ok(graphs)
}
