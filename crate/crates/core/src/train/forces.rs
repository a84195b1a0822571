use super::TrainError;
use crate::geometry::build_radius_graph;
use crate::ingest::Graph3D;
use crate::network::{Model, ModelParams};

pub const MIN_STEP: f64 = 1e-6;
pub const MAX_STEP: f64 = 1e-3;

/// Central-difference forces `-∂E/∂r` with the geometry rebuilt for every
/// displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceEstimate {
    pub forces: Vec<[f64; 3]>,
    /// `(atom, axis)` displacements whose edge set differs from the
    /// undisplaced graph; the energy is not smooth across such a change.
    pub crossings: Vec<(usize, usize)>,
}

impl ForceEstimate {
    pub fn net_force(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for f in &self.forces {
            for a in 0..3 {
                s[a] += f[a];
            }
        }
        s
    }
}

pub fn fd_forces(model: &Model, params: &ModelParams, g: &Graph3D, h: f64) -> Result<ForceEstimate, TrainError> {
    if !(MIN_STEP..=MAX_STEP).contains(&h) {
        return Err(TrainError::Step(h));
    }
    let cutoff = model.config().cutoff_c;
    let base = build_radius_graph(g, cutoff).map_err(crate::network::NetworkError::from)?;
    let edge_set = |e: &crate::geometry::DirectedEdgeList| (e.senders.clone(), e.receivers.clone());
    let base_set = edge_set(&base);
    let mut forces = vec![[0.0; 3]; g.len()];
    let mut crossings = Vec::new();
    for i in 0..g.len() {
        for a in 0..3 {
            let mut e = [0.0; 2];
            let mut crossed = false;
            for (slot, sign) in [(0, 1.0), (1, -1.0)] {
                let mut pos = g.positions().to_vec();
                pos[i][a] += sign * h;
                let moved = g.with_positions(pos).map_err(|source| TrainError::Displacement { atom: i, source })?;
                let edges = build_radius_graph(&moved, cutoff).map_err(crate::network::NetworkError::from)?;
                crossed |= edge_set(&edges) != base_set;
                e[slot] = model.predict(params, &moved)?;
            }
            forces[i][a] = -(e[0] - e[1]) / (2.0 * h);
            if crossed {
                crossings.push((i, a));
            }
        }
    }
    Ok(ForceEstimate { forces, crossings })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geometry::random_cluster;
    use crate::ingest::{AblationMode, RunConfig};

    fn setup() -> (Model, ModelParams, Graph3D) {
        let cfg = RunConfig {
            cutoff_c: 3.0,
            n_srbf: 3,
            n_shbf: 3,
            num_interaction_blocks: 1,
            embed_size: 8,
            int_size_distance: 4,
            int_size_angle: 4,
            int_size_torsion: 4,
            output_embed_size: 8,
            residual_blocks: 1,
            ablation_mode: AblationMode::Full,
            ..RunConfig::default()
        };
        let model = Model::new(&cfg).unwrap();
        let params = model.init_params(3);
        let g = random_cluster(&mut ChaCha8Rng::seed_from_u64(4), 5, 2.0, 0.9);
        (model, params, g)
    }

    #[test]
    fn net_force_vanishes() {
        let (model, params, g) = setup();
        let f = fd_forces(&model, &params, &g, 1e-5).unwrap();
        assert!(f.crossings.is_empty());
        assert!(f.net_force().iter().all(|v| v.abs() < 1e-5), "{:?}", f.net_force());
        assert!(f.forces.iter().flatten().any(|v| v.abs() > 1e-4));
    }

    #[test]
    fn translation_leaves_forces_unchanged() {
        let (model, params, g) = setup();
        let shifted = g.with_positions(g.positions().iter().map(|p| [p[0] + 3.0, p[1] - 1.0, p[2] + 0.5]).collect()).unwrap();
        let a = fd_forces(&model, &params, &g, 1e-5).unwrap();
        let b = fd_forces(&model, &params, &shifted, 1e-5).unwrap();
        for (x, y) in a.forces.iter().flatten().zip(b.forces.iter().flatten()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn halving_the_step_agrees() {
        let (model, params, g) = setup();
        let a = fd_forces(&model, &params, &g, 1e-3).unwrap();
        let b = fd_forces(&model, &params, &g, 5e-4).unwrap();
        for (x, y) in a.forces.iter().flatten().zip(b.forces.iter().flatten()) {
            // O(h²) truncation with a generous constant
            assert!((x - y).abs() < 1e-4 * x.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn step_range_and_crossings() {
        let (model, params, _) = setup();
        assert!(matches!(fd_forces(&model, &params, &setup().2, 1e-2), Err(TrainError::Step(_))));
        assert!(fd_forces(&model, &params, &setup().2, 1e-7).is_err());
        let g = Graph3D::new("pair", vec![6, 6], vec![[0.0; 3], [3.0 - 5e-6, 0.0, 0.0]]).unwrap();
        let f = fd_forces(&model, &params, &g, 1e-5).unwrap();
        assert!(f.crossings.contains(&(0, 0)) && f.crossings.contains(&(1, 0)));
        assert!(!f.crossings.contains(&(0, 1)));
    }
}
