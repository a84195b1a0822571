use thiserror::Error;

use super::elements::MAX_Z;

/// Atoms closer than this (Å) are treated as duplicated positions.
pub const MIN_ATOM_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph has no atoms")]
    Empty,
    #[error("{numbers} atomic numbers but {positions} positions")]
    LengthMismatch { numbers: usize, positions: usize },
    #[error("atomic number {z} of atom {atom} is outside 1..={MAX_Z}")]
    UnsupportedElement { atom: usize, z: u8 },
    #[error("atom {atom} has a non-finite coordinate")]
    NonFinite { atom: usize },
    #[error("atoms {first} and {second} are closer than {MIN_ATOM_SEPARATION} Å")]
    DuplicatePosition { first: usize, second: usize },
    #[error("node targets have {rows} rows for {atoms} atoms")]
    NodeTargetShape { rows: usize, atoms: usize },
    #[error("non-finite {0}")]
    NonFiniteTarget(&'static str),
}

/// A 3D graph: atomic numbers, Cartesian positions (Å) and optional targets.
///
/// Edges are not stored here; they are derived from positions and a cutoff
/// by [`crate::geometry::build_radius_graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct Graph3D {
    id: String,
    atomic_numbers: Vec<u8>,
    positions: Vec<[f64; 3]>,
    graph_target: Option<f64>,
    node_targets: Option<Vec<Vec<f64>>>,
}

impl Graph3D {
    pub fn new(
        id: impl Into<String>,
        atomic_numbers: Vec<u8>,
        positions: Vec<[f64; 3]>,
    ) -> Result<Self, GraphError> {
        if atomic_numbers.is_empty() {
            return Err(GraphError::Empty);
        }
        if atomic_numbers.len() != positions.len() {
            return Err(GraphError::LengthMismatch {
                numbers: atomic_numbers.len(),
                positions: positions.len(),
            });
        }
        for (atom, &z) in atomic_numbers.iter().enumerate() {
            if z == 0 || z > MAX_Z {
                return Err(GraphError::UnsupportedElement { atom, z });
            }
        }
        for (atom, p) in positions.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(GraphError::NonFinite { atom });
            }
        }
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                if distance(&positions[i], &positions[j]) < MIN_ATOM_SEPARATION {
                    return Err(GraphError::DuplicatePosition { first: i, second: j });
                }
            }
        }
        Ok(Self {
            id: id.into(),
            atomic_numbers,
            positions,
            graph_target: None,
            node_targets: None,
        })
    }

    pub fn with_target(mut self, target: f64) -> Result<Self, GraphError> {
        if !target.is_finite() {
            return Err(GraphError::NonFiniteTarget("graph target"));
        }
        self.graph_target = Some(target);
        Ok(self)
    }

    pub fn with_node_targets(mut self, rows: Vec<Vec<f64>>) -> Result<Self, GraphError> {
        if rows.len() != self.len() {
            return Err(GraphError::NodeTargetShape {
                rows: rows.len(),
                atoms: self.len(),
            });
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GraphError::NonFiniteTarget("node target"));
        }
        self.node_targets = Some(rows);
        Ok(self)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Same graph with new positions; every invariant is re-checked.
    pub fn with_positions(&self, positions: Vec<[f64; 3]>) -> Result<Self, GraphError> {
        let mut moved = Graph3D::new(self.id.clone(), self.atomic_numbers.clone(), positions)?;
        moved.graph_target = self.graph_target;
        moved.node_targets = self.node_targets.clone();
        Ok(moved)
    }

    /// Relabel atoms so that new atom `i` is old atom `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.len(), "permutation length");
        Self {
            id: self.id.clone(),
            atomic_numbers: order.iter().map(|&i| self.atomic_numbers[i]).collect(),
            positions: order.iter().map(|&i| self.positions[i]).collect(),
            graph_target: self.graph_target,
            node_targets: self
                .node_targets
                .as_ref()
                .map(|rows| order.iter().map(|&i| rows[i].clone()).collect()),
        }
    }

    /// Two copies of this graph side by side, the second shifted by `offset`.
    pub fn disjoint_union(&self, other: &Graph3D, offset: [f64; 3]) -> Result<Self, GraphError> {
        let mut numbers = self.atomic_numbers.clone();
        numbers.extend_from_slice(&other.atomic_numbers);
        let mut positions = self.positions.clone();
        positions.extend(
            other
                .positions
                .iter()
                .map(|p| [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]]),
        );
        Graph3D::new(format!("{}+{}", self.id, other.id), numbers, positions)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.atomic_numbers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atomic_numbers.is_empty()
    }

    pub fn atomic_numbers(&self) -> &[u8] {
        &self.atomic_numbers
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn graph_target(&self) -> Option<f64> {
        self.graph_target
    }

    pub fn node_targets(&self) -> Option<&[Vec<f64>]> {
        self.node_targets.as_deref()
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_broken_graphs() {
        assert_eq!(Graph3D::new("g", vec![], vec![]), Err(GraphError::Empty));
        assert!(matches!(
            Graph3D::new("g", vec![1, 1], vec![[0.0; 3]]),
            Err(GraphError::LengthMismatch { .. })
        ));
        assert!(matches!(
            Graph3D::new("g", vec![87], vec![[0.0; 3]]),
            Err(GraphError::UnsupportedElement { atom: 0, z: 87 })
        ));
        assert!(matches!(
            Graph3D::new("g", vec![1], vec![[f64::NAN, 0.0, 0.0]]),
            Err(GraphError::NonFinite { atom: 0 })
        ));
        assert!(matches!(
            Graph3D::new("g", vec![1, 1], vec![[0.0; 3], [5e-7, 0.0, 0.0]]),
            Err(GraphError::DuplicatePosition { first: 0, second: 1 })
        ));
        assert!(Graph3D::new("g", vec![1, 1], vec![[0.0; 3], [2e-6, 0.0, 0.0]]).is_ok());
    }

    #[test]
    fn permutation_moves_everything_together() {
        let g = Graph3D::new("g", vec![8, 1, 6], vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
            .unwrap()
            .with_node_targets(vec![vec![0.0], vec![1.0], vec![2.0]])
            .unwrap();
        let p = g.permuted(&[2, 0, 1]);
        assert_eq!(p.atomic_numbers(), &[6, 8, 1]);
        assert_eq!(p.positions()[0], [0.0, 2.0, 0.0]);
        assert_eq!(p.node_targets().unwrap()[2], vec![1.0]);
    }
}
