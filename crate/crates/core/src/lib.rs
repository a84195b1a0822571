//! Spherical message passing over 3D graphs.
//!
//! Positions become per-edge spherical coordinates (distance, angle,
//! torsion), those are expanded in Bessel/harmonic bases, and a message
//! passing network with its own reverse-mode gradients is trained on them.

pub mod basis;
pub mod geometry;
pub mod ingest;
pub mod network;
pub mod train;

pub use ingest::{AblationMode, Graph3D, RunConfig, Schedule};
