//! Spherical message passing network with hand-written reverse mode.
//!
//! Features are computed once per graph ([`Model::featurize`]); a
//! [`Forward`] keeps the full tape so [`Model::backward`] can push an
//! upstream gradient into a [`Gradients`] buffer.

mod checkpoint;
mod filters;
mod model;
mod params;
mod tape;
mod tensor;

use thiserror::Error;

use crate::basis::BasisError;
use crate::geometry::GeometryError;
use crate::ingest::ConfigError;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, FORMAT_VERSION};
pub use filters::{export_filters, FilterGrid, FilterRow};
pub use model::{Forward, GraphFeatures, Model};
pub use params::{Gradients, Layout, ModelParams, ParamKind, ParamSpec};
pub use tape::{NodeId, Tape};
pub use tensor::Matrix;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Stage `0` is the embedding block, `1..=B` the interaction blocks and
    /// `B + 1` the output block.
    #[error("non-finite value in block {block}")]
    NonFinite { block: usize },
    #[error("invalid filter grid: {0}")]
    Grid(String),
    #[error("checkpoint does not match the session config: {0}")]
    ConfigMismatch(String),
    #[error("malformed checkpoint: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
