//! Line-delimited dataset manifests: `{"file": "<relative path>", "target": <float>}`.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: {message}")]
    Record { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub target: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    file: String,
    target: Value,
}

/// Read a manifest, resolving structure paths relative to the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>, ManifestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_manifest(&text, base)
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fail = |message: String| ManifestError::Record { line, message };
        if raw.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(raw).map_err(|e| fail(e.to_string()))?;
        let target = match &record.target {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => s.trim().parse::<f64>().ok(),
            _ => None,
        }
        .ok_or_else(|| fail(format!("target {} is not a number", record.target)))?;
        if !target.is_finite() {
            return Err(fail(format!("target {} is not finite", record.target)));
        }
        if !seen.insert(record.file.clone()) {
            return Err(fail(format!("duplicate entry {:?}", record.file)));
        }
        let resolved = base.join(&record.file);
        if !resolved.is_file() {
            return Err(fail(format!("structure file {} does not exist", resolved.display())));
        }
        entries.push(ManifestEntry { path: resolved, target });
    }
    Ok(entries)
}
