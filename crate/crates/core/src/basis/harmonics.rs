//! Real, unit-normalized spherical harmonics without the Condon–Shortley phase.
//!
//! `Y_l^m = √2 P̄_l^m(cos θ) cos(mφ)` for `m > 0`, `√2 P̄_l^|m|(cos θ) sin(|m|φ)`
//! for `m < 0`, and `P̄_l^0(cos θ)` for `m = 0`, where `P̄` are the
//! associated Legendre functions scaled so each `Y` has unit norm on the sphere.

use std::f64::consts::PI;

use super::BasisError;
use crate::ingest::MAX_DEGREE;

/// Position of `(l, m)` in the flattened `l = 0..`, `m = -l..=l` layout.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    l * l + (l as i64 + m) as usize
}

/// Normalized `P̄_l^m(cos θ)` for `0 <= m <= l <= l_max`, stored at
/// `l * (l + 1) / 2 + m`.
pub(crate) fn legendre_table(l_max: usize, theta: f64, out: &mut [f64]) {
    let (s, c) = theta.sin_cos();
    let at = |l: usize, m: usize| l * (l + 1) / 2 + m;
    out[0] = 0.5 / PI.sqrt();
    for m in 1..=l_max {
        let mf = m as f64;
        out[at(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * out[at(m - 1, m - 1)];
    }
    for m in 0..l_max {
        out[at(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * c * out[at(m, m)];
    }
    for m in 0..=l_max {
        let mf = m as f64;
        for l in m + 2..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            out[at(l, m)] = a * (c * out[at(l - 1, m)] - b * out[at(l - 2, m)]);
        }
    }
}

/// All `Y_l^m(θ, φ)` for `l < n_degrees`, written to `out[lm_index(l, m)]`.
pub(crate) fn sph_harm_all(n_degrees: usize, theta: f64, phi: f64, out: &mut [f64]) {
    if n_degrees == 0 {
        return;
    }
    let l_max = n_degrees - 1;
    let mut p = [0.0; (MAX_DEGREE + 1) * (MAX_DEGREE + 2) / 2];
    legendre_table(l_max, theta, &mut p);
    let mut trig = [(0.0, 0.0); MAX_DEGREE + 1];
    for (m, t) in trig.iter_mut().enumerate().take(l_max + 1) {
        *t = (m as f64 * phi).sin_cos();
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    for l in 0..=l_max {
        let base = l * (l + 1) / 2;
        out[lm_index(l, 0)] = p[base];
        for m in 1..=l {
            let (s, c) = trig[m];
            out[lm_index(l, m as i64)] = sqrt2 * p[base + m] * c;
            out[lm_index(l, -(m as i64))] = sqrt2 * p[base + m] * s;
        }
    }
}

/// Zonal harmonics `Y_l^0(θ)` for `l < n_degrees`.
pub(crate) fn zonal_all(n_degrees: usize, theta: f64, out: &mut [f64]) {
    if n_degrees == 0 {
        return;
    }
    let c = theta.cos();
    let norm = |l: usize| ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
    // Legendre P_l(c) by Bonnet's recurrence
    let (mut p_prev, mut p) = (1.0, c);
    out[0] = norm(0);
    if n_degrees > 1 {
        out[1] = norm(1) * c;
    }
    for l in 2..n_degrees {
        let lf = l as f64;
        let next = ((2.0 * lf - 1.0) * c * p - (lf - 1.0) * p_prev) / lf;
        p_prev = p;
        p = next;
        out[l] = norm(l) * p;
    }
}

pub fn real_sph_harm(l: usize, m: i64, theta: f64, phi: f64) -> Result<f64, BasisError> {
    if l > MAX_DEGREE {
        return Err(BasisError::DegreeOutOfRange(l));
    }
    if m.unsigned_abs() as usize > l {
        return Err(BasisError::OrderOutOfRange { l, m });
    }
    if !(theta.is_finite() && phi.is_finite()) {
        return Err(BasisError::AngleOutOfRange(if theta.is_finite() { phi } else { theta }));
    }
    let mut out = vec![0.0; (l + 1) * (l + 1)];
    sph_harm_all(l + 1, theta, phi, &mut out);
    Ok(out[lm_index(l, m)])
}
