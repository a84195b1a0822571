//! Four-atom chains a–b–c–d with controlled bond lengths, bond angles and
//! dihedral, for ablation studies.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TrainError;
use crate::geometry::{random_rotation, rigid_transform};
use crate::ingest::Graph3D;

pub const MIN_SAMPLES: usize = 64;
pub const BOND_RANGE: (f64, f64) = (0.9, 1.1);
/// Bond angle range in degrees.
pub const ANGLE_RANGE: (f64, f64) = (100.0, 120.0);
const CHAIN_ELEMENT: u8 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntheticTask {
    /// `cos ψ + 0.1 (d_ab + d_bc + d_cd)`
    Torsion,
    /// `cos θ_abc + cos θ_bcd`
    Angle,
    /// `d_ab + d_bc + d_cd`
    Length,
}

impl SyntheticTask {
    pub const ALL: [SyntheticTask; 3] = [SyntheticTask::Torsion, SyntheticTask::Angle, SyntheticTask::Length];

    pub fn as_str(self) -> &'static str {
        match self {
            SyntheticTask::Torsion => "torsion",
            SyntheticTask::Angle => "angle",
            SyntheticTask::Length => "length",
        }
    }

    pub fn target(self, chain: &ChainParams) -> f64 {
        let [d1, d2, d3] = chain.bonds;
        match self {
            SyntheticTask::Torsion => chain.dihedral.cos() + 0.1 * (d1 + d2 + d3),
            SyntheticTask::Angle => chain.angles[0].cos() + chain.angles[1].cos(),
            SyntheticTask::Length => d1 + d2 + d3,
        }
    }
}

impl fmt::Display for SyntheticTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SyntheticTask {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "torsion" => Ok(SyntheticTask::Torsion),
            "angle" | "angles" => Ok(SyntheticTask::Angle),
            "length" | "lengths" => Ok(SyntheticTask::Length),
            _ => Err(format!("unknown task '{s}' (expected torsion, angle or length)")),
        }
    }
}

/// Internal coordinates of one chain; angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub bonds: [f64; 3],
    pub angles: [f64; 2],
    pub dihedral: f64,
}

impl ChainParams {
    /// Cartesian positions with b at the origin and c on +x; ψ = 0 is cis.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        let [d1, d2, d3] = self.bonds;
        let [t1, t2] = self.angles;
        let psi = self.dihedral;
        let a = [d1 * t1.cos(), d1 * t1.sin(), 0.0];
        let b = [0.0; 3];
        let c = [d2, 0.0, 0.0];
        let d = [d2 - d3 * t2.cos(), d3 * t2.sin() * psi.cos(), d3 * t2.sin() * psi.sin()];
        vec![a, b, c, d]
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let bond = |rng: &mut R| rng.random_range(BOND_RANGE.0..=BOND_RANGE.1);
        let angle = |rng: &mut R| rng.random_range(ANGLE_RANGE.0..=ANGLE_RANGE.1).to_radians();
        let bonds = [bond(rng), bond(rng), bond(rng)];
        let angles = [angle(rng), angle(rng)];
        let dihedral = rng.random_range(0.0..TAU);
        Self { bonds, angles, dihedral }
    }

    /// Chain graph with `task`'s target, randomly oriented by `rng`.
    pub fn to_graph<R: Rng + ?Sized>(&self, task: SyntheticTask, id: String, rng: &mut R) -> Graph3D {
        let g = Graph3D::new(id, vec![CHAIN_ELEMENT; 4], self.positions()).expect("chain atoms are separated");
        let rot = random_rotation(rng);
        let shift = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        rigid_transform(&g, &rot, shift)
            .expect("proper rotation")
            .with_target(task.target(self))
            .expect("finite target")
    }
}

/// `n_samples` random chains labeled for `task`; identical for equal seeds.
pub fn synthetic_dataset(task: SyntheticTask, n_samples: usize, seed: u64) -> Result<Vec<Graph3D>, TrainError> {
    if n_samples < MIN_SAMPLES {
        return Err(TrainError::TooFewSamples { n: n_samples, min: MIN_SAMPLES });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_samples)
        .map(|i| ChainParams::sample(&mut rng).to_graph(task, format!("{task}-{i}"), &mut rng))
        .collect())
}
