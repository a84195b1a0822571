use std::f64::consts::PI;

use super::model::Model;
use super::params::ModelParams;
use super::tensor::{self, Matrix};
use super::NetworkError;

/// Sample points of a filter export; rows are emitted with `d` outermost and
/// `phi` innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterGrid {
    pub d: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl FilterGrid {
    /// `count` evenly spaced points over `[lo, hi]` (just `lo` when `count == 1`).
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.d.len() * self.theta.len() * self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterRow {
    pub d: f64,
    pub theta: f64,
    pub phi: f64,
    pub channels: Vec<f64>,
}

impl FilterRow {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{},{}", self.d, self.theta, self.phi);
        for c in &self.channels {
            s.push(',');
            s.push_str(&c.to_string());
        }
        s
    }
}

/// Evaluate the torsion LB2 of interaction block `block` on the torsion basis
/// at every grid point.
pub fn export_filters(
    model: &Model,
    params: &ModelParams,
    grid: &FilterGrid,
    block: usize,
) -> Result<Vec<FilterRow>, NetworkError> {
    if grid.is_empty() {
        return Err(NetworkError::Grid("every axis needs at least one sample".into()));
    }
    let blocks = &model.arch().blocks;
    let Some(ids) = blocks.get(block) else {
        return Err(NetworkError::Grid(format!("block {block} out of range (model has {})", blocks.len())));
    };
    let Some(lb2) = ids.torsion else {
        return Err(NetworkError::Grid(format!("mode {} has no torsion filters", model.config().ablation_mode)));
    };
    for &t in &grid.theta {
        if !(0.0..=PI).contains(&t) {
            return Err(NetworkError::Grid(format!("theta {t} outside [0, pi]")));
        }
    }
    let tables = model.tables();
    let (down, up) = (params.tensor(lb2.down), params.tensor(lb2.up));
    let mut rows = Vec::with_capacity(grid.len());
    for &d in &grid.d {
        for &theta in &grid.theta {
            for &phi in &grid.phi {
                if !phi.is_finite() {
                    return Err(NetworkError::Grid(format!("phi {phi} is not finite")));
                }
                let basis = tables.tbf(d, theta, phi)?;
                let x = Matrix::from_vec(1, basis.len(), basis);
                let y = tensor::linear(&tensor::linear(&x, down, None), up, None);
                rows.push(FilterRow { d, theta, phi, channels: y.into_vec() });
            }
        }
    }
    Ok(rows)
}
