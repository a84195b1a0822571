use std::ops::Range;

use super::vec3::{norm, sub};
use super::GeometryError;
use crate::ingest::Graph3D;

/// Directed radius-graph edges `s_k -> r_k`, sorted by (receiver, sender) so
/// that the incoming edges of node `i` form the contiguous range `E_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedEdgeList {
    pub senders: Vec<usize>,
    pub receivers: Vec<usize>,
    pub distances: Vec<f64>,
    offsets: Vec<usize>,
    cutoff: f64,
}

impl DirectedEdgeList {
    pub fn len(&self) -> usize {
        self.senders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.senders.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Edge indices whose receiver is `node`.
    pub fn incoming(&self, node: usize) -> Range<usize> {
        self.offsets[node]..self.offsets[node + 1]
    }
}

/// Every ordered pair of distinct atoms within `cutoff` (inclusive), as an
/// O(n²) scan.
pub fn build_radius_graph(g: &Graph3D, cutoff: f64) -> Result<DirectedEdgeList, GeometryError> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(GeometryError::InvalidCutoff(cutoff));
    }
    let pos = g.positions();
    let n = pos.len();
    let mut senders = Vec::new();
    let mut receivers = Vec::new();
    let mut distances = Vec::new();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for r in 0..n {
        for s in 0..n {
            if s == r {
                continue;
            }
            let d = norm(&sub(&pos[r], &pos[s]));
            if d > 0.0 && d <= cutoff {
                senders.push(s);
                receivers.push(r);
                distances.push(d);
            }
        }
        offsets.push(senders.len());
    }
    Ok(DirectedEdgeList { senders, receivers, distances, offsets, cutoff })
}

/// Two-hop message paths: for edge `k`, every edge `j` arriving at `s_k`
/// except the reverse of `k`. Pairs for edge `k` occupy `range(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoHopIndex {
    pub k: Vec<usize>,
    pub j: Vec<usize>,
    offsets: Vec<usize>,
}

impl TwoHopIndex {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn range(&self, edge: usize) -> Range<usize> {
        self.offsets[edge]..self.offsets[edge + 1]
    }

    /// Number of contributing neighbors `t` of edge `k`.
    pub fn neighbor_count(&self, edge: usize) -> usize {
        self.offsets[edge + 1] - self.offsets[edge]
    }
}

pub fn build_two_hop_index(edges: &DirectedEdgeList) -> TwoHopIndex {
    let mut k_idx = Vec::new();
    let mut j_idx = Vec::new();
    let mut offsets = Vec::with_capacity(edges.len() + 1);
    offsets.push(0);
    for k in 0..edges.len() {
        let (s, r) = (edges.senders[k], edges.receivers[k]);
        for j in edges.incoming(s) {
            if edges.senders[j] != r {
                k_idx.push(k);
                j_idx.push(j);
            }
        }
        offsets.push(k_idx.len());
    }
    TwoHopIndex { k: k_idx, j: j_idx, offsets }
}
