//! Radius graphs and the per-path spherical coordinates (d, θ, φ).
//!
//! For a directed edge `k: s_k -> r_k` the contributing neighbors are the
//! senders of the other edges arriving at `s_k`. Each neighbor `q` is
//! described relative to `s_k` by its distance, the angle between `s_k -> r_k`
//! and `s_k -> q`, and a torsion: the azimuthal gap to the previous neighbor
//! when all of them are projected onto the plane orthogonal to the edge.

mod edges;
mod motion;
mod spherical;
pub(crate) mod vec3;

use rand::Rng;
use thiserror::Error;

use crate::ingest::{Graph3D, GraphError};

pub use edges::{build_radius_graph, build_two_hop_index, DirectedEdgeList, TwoHopIndex};
pub use motion::{random_motion, random_rotation, rigid_transform, Mat3, IDENTITY};
pub use spherical::{compute_angles, compute_torsions, CollinearNeighbor, Torsions, COLLINEAR_EPS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("cutoff must be positive and finite, got {0}")]
    InvalidCutoff(f64),
    #[error("rotation is not orthogonal (max |RᵀR - I| = {0:e})")]
    NotOrthogonal(f64),
    #[error("rotation has determinant {0}; reflections are not supported")]
    ImproperRotation(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Everything the network needs from the positions of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoHopGeometry {
    pub edges: DirectedEdgeList,
    pub pairs: TwoHopIndex,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub collinear: Vec<CollinearNeighbor>,
}

impl TwoHopGeometry {
    /// Distance `d_j` entering the (d, θ, φ) tuple of pair `p`.
    pub fn pair_distance(&self, p: usize) -> f64 {
        self.edges.distances[self.pairs.j[p]]
    }
}

pub fn compute_geometry(g: &Graph3D, cutoff: f64) -> Result<TwoHopGeometry, GeometryError> {
    let edges = build_radius_graph(g, cutoff)?;
    let pairs = build_two_hop_index(&edges);
    let theta = compute_angles(g, &edges, &pairs);
    let Torsions { phi, collinear, .. } = compute_torsions(g, &edges, &pairs);
    Ok(TwoHopGeometry { edges, pairs, theta, phi, collinear })
}

/// Random cluster of `n` atoms (H, C, N, O) inside a cube of side `extent`,
/// no two atoms closer than `min_sep`. Used by tests and benchmarks.
pub fn random_cluster<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    extent: f64,
    min_sep: f64,
) -> Graph3D {
    const ELEMENTS: [u8; 4] = [1, 6, 7, 8];
    let mut positions: Vec<[f64; 3]> = Vec::with_capacity(n);
    while positions.len() < n {
        let p = [
            rng.random_range(0.0..extent),
            rng.random_range(0.0..extent),
            rng.random_range(0.0..extent),
        ];
        if positions
            .iter()
            .all(|q| vec3::norm(&vec3::sub(&p, q)) >= min_sep)
        {
            positions.push(p);
        }
    }
    let numbers = (0..n).map(|_| ELEMENTS[rng.random_range(0..ELEMENTS.len())]).collect();
    Graph3D::new("cluster", numbers, positions).expect("separated finite positions")
}
