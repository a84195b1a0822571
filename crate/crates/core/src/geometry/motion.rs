use rand::Rng;

use super::GeometryError;
use crate::ingest::Graph3D;

pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

const ORTHOGONALITY_TOL: f64 = 1e-12;

fn determinant(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Largest entry of |RᵀR − I|.
fn orthogonality_defect(m: &Mat3) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let s: f64 = (0..3).map(|i| m[i][a] * m[i][b]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((s - target).abs());
        }
    }
    worst
}

/// Map every position `r -> R r + t`. `R` must be a proper rotation.
pub fn rigid_transform(
    g: &Graph3D,
    rotation: &Mat3,
    translation: [f64; 3],
) -> Result<Graph3D, GeometryError> {
    let defect = orthogonality_defect(rotation);
    if !(defect <= ORTHOGONALITY_TOL) {
        return Err(GeometryError::NotOrthogonal(defect));
    }
    let det = determinant(rotation);
    if det < 0.0 {
        return Err(GeometryError::ImproperRotation(det));
    }
    let moved = g
        .positions()
        .iter()
        .map(|p| {
            let mut q = translation;
            for (i, row) in rotation.iter().enumerate() {
                q[i] += row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
            }
            q
        })
        .collect();
    g.with_positions(moved).map_err(GeometryError::Graph)
}

/// Uniformly distributed proper rotation (unit quaternion via Shoemake's
/// subgroup algorithm).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    use std::f64::consts::TAU;
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) = (
        a * (TAU * u2).sin(),
        a * (TAU * u2).cos(),
        b * (TAU * u3).sin(),
        b * (TAU * u3).cos(),
    );
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// A random rotation plus a translation with components in `[-span, span]`.
pub fn random_motion<R: Rng + ?Sized>(rng: &mut R, span: f64) -> (Mat3, [f64; 3]) {
    let rotation = random_rotation(rng);
    let t = [
        rng.random_range(-span..=span),
        rng.random_range(-span..=span),
        rng.random_range(-span..=span),
    ];
    (rotation, t)
}
