//! Physically based expansions of (d, θ, φ).
//!
//! Radial functions are spherical Bessel functions `j_l(z_ln d / c)` whose
//! frequencies are fixed by requiring them to vanish at the cutoff `c`;
//! angular functions are real spherical harmonics.
//!
//! * `rbf`: `√(2/c) sin(nπd/c) / d`, length `n_srbf`
//! * `sbf`: `N_ln j_l(z_ln d/c) Y_l^0(θ)`, length `n_shbf · n_srbf`, index `l·n_srbf + n-1`
//! * `tbf`: `N_ln j_l(z_ln d/c) Y_l^m(θ, φ)`, length `n_srbf · n_shbf²`,
//!   index `(l² + l + m)·n_srbf + n-1`
//!
//! with `N_ln = √(2 / (c³ j_{l+1}(z_ln)²))`, which makes every radial family
//! orthonormal on `[0, c]` under the weight `d²`.

mod bessel;
mod harmonics;

use std::f64::consts::PI;

use thiserror::Error;

use crate::ingest::{RunConfig, MAX_DEGREE, MAX_ROOTS};

pub use bessel::{bessel_roots, spherical_bessel};
pub use harmonics::{lm_index, real_sph_harm};

/// Below this distance (Å) the distance basis uses its `d -> 0` limit.
pub const SMALL_DISTANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("degree {0} is above the supported maximum {MAX_DEGREE}")]
    DegreeOutOfRange(usize),
    #[error("order m = {m} is invalid for degree l = {l}")]
    OrderOutOfRange { l: usize, m: i64 },
    #[error("root count {0} must be in 1..={MAX_ROOTS}")]
    RootCountOutOfRange(usize),
    #[error("Bessel argument {0} must be finite and non-negative")]
    ArgumentOutOfRange(f64),
    #[error("cutoff must be positive and finite, got {0}")]
    InvalidCutoff(f64),
    #[error("distance {d} is outside (0, {cutoff}]")]
    DistanceOutOfRange { d: f64, cutoff: f64 },
    #[error("angle {0} is outside its domain")]
    AngleOutOfRange(f64),
}

/// Roots and normalization constants for one `(c, n_srbf, n_shbf)` triple.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTables {
    cutoff: f64,
    n_srbf: usize,
    n_shbf: usize,
    roots: Vec<f64>,
    norms: Vec<f64>,
}

impl BasisTables {
    pub fn new(cutoff: f64, n_srbf: usize, n_shbf: usize) -> Result<Self, BasisError> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(BasisError::InvalidCutoff(cutoff));
        }
        if n_shbf == 0 {
            return Err(BasisError::DegreeOutOfRange(0));
        }
        let table = bessel_roots(n_shbf - 1, n_srbf)?;
        let scale = (2.0 / cutoff.powi(3)).sqrt();
        let mut roots = Vec::with_capacity(n_shbf * n_srbf);
        let mut norms = Vec::with_capacity(n_shbf * n_srbf);
        for (l, row) in table.iter().enumerate() {
            for &z in row {
                roots.push(z);
                norms.push(scale / bessel::sph_jn(l + 1, z).abs());
            }
        }
        Ok(Self { cutoff, n_srbf, n_shbf, roots, norms })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self, BasisError> {
        Self::new(cfg.cutoff_c, cfg.n_srbf, cfg.n_shbf)
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn n_srbf(&self) -> usize {
        self.n_srbf
    }

    pub fn n_shbf(&self) -> usize {
        self.n_shbf
    }

    /// `z_ln` for `n` counted from 1.
    pub fn root(&self, l: usize, n: usize) -> f64 {
        self.roots[l * self.n_srbf + n - 1]
    }

    pub fn norm(&self, l: usize, n: usize) -> f64 {
        self.norms[l * self.n_srbf + n - 1]
    }

    pub fn rbf_len(&self) -> usize {
        self.n_srbf
    }

    pub fn sbf_len(&self) -> usize {
        self.n_shbf * self.n_srbf
    }

    pub fn tbf_len(&self) -> usize {
        self.n_shbf * self.n_shbf * self.n_srbf
    }

    fn check(&self, d: f64, theta: f64, phi: f64) -> Result<(), BasisError> {
        if !(d > 0.0 && d <= self.cutoff) {
            return Err(BasisError::DistanceOutOfRange { d, cutoff: self.cutoff });
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(BasisError::AngleOutOfRange(theta));
        }
        if !phi.is_finite() {
            return Err(BasisError::AngleOutOfRange(phi));
        }
        Ok(())
    }

    pub fn rbf(&self, d: f64) -> Result<Vec<f64>, BasisError> {
        self.check(d, 0.0, 0.0)?;
        let mut out = vec![0.0; self.rbf_len()];
        self.rbf_into(d, &mut out);
        Ok(out)
    }

    pub fn sbf(&self, d: f64, theta: f64) -> Result<Vec<f64>, BasisError> {
        self.check(d, theta, 0.0)?;
        let mut out = vec![0.0; self.sbf_len()];
        self.sbf_into(d, theta, &mut out);
        Ok(out)
    }

    pub fn tbf(&self, d: f64, theta: f64, phi: f64) -> Result<Vec<f64>, BasisError> {
        self.check(d, theta, phi)?;
        let mut out = vec![0.0; self.tbf_len()];
        self.tbf_into(d, theta, phi, &mut out);
        Ok(out)
    }

    /// Unchecked [`rbf`](Self::rbf) into a caller buffer.
    pub fn rbf_into(&self, d: f64, out: &mut [f64]) {
        let c = self.cutoff;
        let pre = (2.0 / c).sqrt();
        for (i, o) in out[..self.n_srbf].iter_mut().enumerate() {
            let k = (i + 1) as f64 * PI / c;
            *o = if d >= c {
                0.0
            } else if d < SMALL_DISTANCE {
                pre * k
            } else {
                pre * (k * d).sin() / d
            };
        }
    }

    /// `N_ln j_l(z_ln d/c)` at index `l·n_srbf + n-1`.
    fn radial_into(&self, d: f64, out: &mut [f64]) {
        let x = d / self.cutoff;
        for (i, o) in out[..self.sbf_len()].iter_mut().enumerate() {
            let l = i / self.n_srbf;
            *o = if d >= self.cutoff {
                0.0
            } else {
                self.norms[i] * bessel::sph_jn(l, self.roots[i] * x)
            };
        }
    }

    /// Unchecked [`sbf`](Self::sbf) into a caller buffer.
    pub fn sbf_into(&self, d: f64, theta: f64, out: &mut [f64]) {
        self.radial_into(d, out);
        let mut y = [0.0; MAX_DEGREE + 1];
        harmonics::zonal_all(self.n_shbf, theta, &mut y);
        for (i, o) in out[..self.sbf_len()].iter_mut().enumerate() {
            *o *= y[i / self.n_srbf];
        }
    }

    /// Unchecked [`tbf`](Self::tbf) into a caller buffer.
    pub fn tbf_into(&self, d: f64, theta: f64, phi: f64, out: &mut [f64]) {
        let nr = self.n_srbf;
        let mut radial = [0.0; (MAX_DEGREE + 1) * MAX_ROOTS];
        self.radial_into(d, &mut radial);
        let mut y = [0.0; (MAX_DEGREE + 1) * (MAX_DEGREE + 1)];
        harmonics::sph_harm_all(self.n_shbf, theta, phi, &mut y);
        for l in 0..self.n_shbf {
            for m in -(l as i64)..=l as i64 {
                let lm = lm_index(l, m);
                for n in 0..nr {
                    out[lm * nr + n] = radial[l * nr + n] * y[lm];
                }
            }
        }
    }
}
