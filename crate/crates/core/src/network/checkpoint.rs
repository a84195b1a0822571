//! Binary model files: `SMPM`, a u32 format version, a u64 header length,
//! a JSON header (config echo and tensor directory), then every tensor as
//! little-endian f64 in directory order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::Model;
use super::params::ModelParams;
use super::tensor::Matrix;
use super::NetworkError;
use crate::ingest::RunConfig;

const MAGIC: &[u8; 4] = b"SMPM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    config: RunConfig,
    tensors: Vec<TensorEntry>,
}

pub fn write_checkpoint<W: Write>(mut w: W, cfg: &RunConfig, params: &ModelParams) -> Result<(), NetworkError> {
    if Model::new(cfg)?.layout().as_ref() != params.layout().as_ref() {
        return Err(NetworkError::Shape("parameters do not match the config architecture".into()));
    }
    let header = Header {
        format_version: FORMAT_VERSION,
        config: cfg.clone(),
        tensors: params
            .layout()
            .specs()
            .iter()
            .map(|s| TensorEntry { name: s.name.clone(), rows: s.rows, cols: s.cols })
            .collect(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| NetworkError::Format(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for v in params.scalars() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a model file. With a `session` config, any architectural difference
/// from the stored config is an error.
pub fn read_checkpoint<R: Read>(
    mut r: R,
    session: Option<&RunConfig>,
) -> Result<(Model, ModelParams), NetworkError> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(NetworkError::Format("not a model file".into()));
    }
    let mut b4 = [0u8; 4];
    read_exact(&mut r, &mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != FORMAT_VERSION {
        return Err(NetworkError::Format(format!("unsupported format version {version}")));
    }
    let mut b8 = [0u8; 8];
    read_exact(&mut r, &mut b8)?;
    let len = usize::try_from(u64::from_le_bytes(b8))
        .ok()
        .filter(|&n| n <= 1 << 24)
        .ok_or_else(|| NetworkError::Format("header too large".into()))?;
    let mut json = vec![0u8; len];
    read_exact(&mut r, &mut json)?;
    let header: Header = serde_json::from_slice(&json).map_err(|e| NetworkError::Format(e.to_string()))?;
    if header.format_version != version {
        return Err(NetworkError::Format("header version disagrees with preamble".into()));
    }
    if let Some(s) = session {
        if !s.same_architecture(&header.config) {
            return Err(NetworkError::ConfigMismatch(format!(
                "stored config:\n{}session config:\n{}",
                header.config.to_text(),
                s.to_text()
            )));
        }
    }
    let model = Model::new(&header.config)?;
    let specs = model.layout().specs();
    if specs.len() != header.tensors.len() {
        return Err(NetworkError::Format(format!(
            "{} tensors stored, architecture needs {}",
            header.tensors.len(),
            specs.len()
        )));
    }
    let mut tensors = Vec::with_capacity(specs.len());
    for (spec, entry) in specs.iter().zip(&header.tensors) {
        if spec.name != entry.name || spec.rows != entry.rows || spec.cols != entry.cols {
            return Err(NetworkError::Format(format!(
                "tensor {} ({}x{}) where {} ({}x{}) was expected",
                entry.name, entry.rows, entry.cols, spec.name, spec.rows, spec.cols
            )));
        }
        let mut data = vec![0.0; spec.rows * spec.cols];
        for v in &mut data {
            read_exact(&mut r, &mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        tensors.push(Matrix::from_vec(spec.rows, spec.cols, data));
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(NetworkError::Format("trailing bytes after tensors".into()));
    }
    let params = ModelParams::from_tensors(model.layout().clone(), tensors)?;
    Ok((model, params))
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), NetworkError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => NetworkError::Format("file is truncated".into()),
        _ => NetworkError::Io(e),
    })
}

pub fn save_checkpoint(path: impl AsRef<Path>, cfg: &RunConfig, params: &ModelParams) -> Result<(), NetworkError> {
    write_checkpoint(BufWriter::new(File::create(path)?), cfg, params)
}

pub fn load_checkpoint(
    path: impl AsRef<Path>,
    session: Option<&RunConfig>,
) -> Result<(Model, ModelParams), NetworkError> {
    read_checkpoint(BufReader::new(File::open(path)?), session)
}
