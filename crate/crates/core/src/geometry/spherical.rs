use std::cmp::Ordering;
use std::f64::consts::TAU;

use super::edges::{DirectedEdgeList, TwoHopIndex};
use super::vec3::{cross, dot, norm, scale, sub, Vec3};
use crate::ingest::Graph3D;

/// Projections shorter than this (Å) count as lying on the edge axis.
pub const COLLINEAR_EPS: f64 = 1e-8;

/// θ for every pair: the angle at `s_k` between the directions to `r_k` and `s_j`.
pub fn compute_angles(g: &Graph3D, edges: &DirectedEdgeList, pairs: &TwoHopIndex) -> Vec<f64> {
    let pos = g.positions();
    pairs
        .k
        .iter()
        .zip(&pairs.j)
        .map(|(&k, &j)| {
            let origin = &pos[edges.senders[k]];
            let a = sub(&pos[edges.receivers[k]], origin);
            let b = sub(&pos[edges.senders[j]], origin);
            let cos = dot(&a, &b) / (norm(&a) * norm(&b));
            cos.clamp(-1.0, 1.0).acos()
        })
        .collect()
}

/// A neighbor lying on the axis of edge `edge`; its torsion is set to zero
/// and it is left out of the azimuthal cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollinearNeighbor {
    pub edge: usize,
    pub pair: usize,
    pub node: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Torsions {
    pub phi: Vec<f64>,
    /// Neighbor count `t` per edge.
    pub counts: Vec<usize>,
    pub collinear: Vec<CollinearNeighbor>,
}

/// Unit vector orthogonal to `u`, built from the coordinate axis least
/// aligned with it.
fn reference_direction(u: &Vec3) -> Vec3 {
    let mut axis = [0.0; 3];
    let pick = (0..3)
        .min_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap_or(Ordering::Equal))
        .unwrap_or(0);
    axis[pick] = 1.0;
    let e = sub(&axis, &scale(u, dot(&axis, u)));
    scale(&e, 1.0 / norm(&e))
}

/// φ for every pair. Neighbors of `s_k` are projected onto the plane
/// orthogonal to the `s_k -> r_k` axis, ordered anticlockwise about it, and
/// each gets the azimuthal gap back to its cyclic predecessor.
pub fn compute_torsions(g: &Graph3D, edges: &DirectedEdgeList, pairs: &TwoHopIndex) -> Torsions {
    let pos = g.positions();
    let mut phi = vec![0.0; pairs.len()];
    let mut counts = Vec::with_capacity(edges.len());
    let mut collinear = Vec::new();
    // (azimuth, distance, node, pair)
    let mut ring: Vec<(f64, f64, usize, usize)> = Vec::new();
    for k in 0..edges.len() {
        let range = pairs.range(k);
        counts.push(range.len());
        if range.len() < 2 {
            continue;
        }
        let origin = &pos[edges.senders[k]];
        let axis = sub(&pos[edges.receivers[k]], origin);
        let u = scale(&axis, 1.0 / norm(&axis));
        let e1 = reference_direction(&u);
        let e2 = cross(&u, &e1);
        ring.clear();
        for p in range {
            let node = edges.senders[pairs.j[p]];
            let b = sub(&pos[node], origin);
            let proj = sub(&b, &scale(&u, dot(&b, &u)));
            if norm(&proj) < COLLINEAR_EPS {
                collinear.push(CollinearNeighbor { edge: k, pair: p, node });
                continue;
            }
            let az = dot(&proj, &e2).atan2(dot(&proj, &e1)).rem_euclid(TAU);
            ring.push((az, edges.distances[pairs.j[p]], node, p));
        }
        if ring.len() < 2 {
            continue;
        }
        ring.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let last = ring[ring.len() - 1].0;
        phi[ring[0].3] = ring[0].0 - last + TAU;
        for w in ring.windows(2) {
            phi[w[1].3] = w[1].0 - w[0].0;
        }
    }
    Torsions { phi, counts, collinear }
}
