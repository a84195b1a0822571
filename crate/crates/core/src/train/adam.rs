use super::TrainError;
use crate::network::{Gradients, Matrix, ModelParams};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam moments mirroring a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimState {
    m: Vec<Matrix>,
    v: Vec<Matrix>,
    step: u64,
    lr: f64,
}

impl OptimState {
    pub fn new(params: &ModelParams) -> Self {
        let zeros: Vec<Matrix> = params.tensors().iter().map(|t| Matrix::zeros(t.rows(), t.cols())).collect();
        Self { m: zeros.clone(), v: zeros, step: 0, lr: 0.0 }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }
}

/// One bias-corrected Adam update; no weight decay.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &Gradients,
    opt: &mut OptimState,
    lr: f64,
) -> Result<(), TrainError> {
    let n = params.tensors().len();
    if grads.tensors().len() != n || opt.m.len() != n {
        return Err(TrainError::Shape(format!(
            "{n} parameters, {} gradients, {} moments",
            grads.tensors().len(),
            opt.m.len()
        )));
    }
    for i in 0..n {
        let shape = params.tensor(i).shape();
        if grads.tensor(i).shape() != shape || opt.m[i].shape() != shape {
            return Err(TrainError::Shape(format!("tensor {i} is {shape:?}")));
        }
    }
    opt.step += 1;
    opt.lr = lr;
    let c1 = 1.0 - BETA1.powi(opt.step as i32);
    let c2 = 1.0 - BETA2.powi(opt.step as i32);
    for i in 0..n {
        let g = grads.tensor(i).data();
        let m = opt.m[i].data_mut();
        let v = opt.v[i].data_mut();
        let p = params.tensor_mut(i).data_mut();
        for k in 0..p.len() {
            m[k] = BETA1 * m[k] + (1.0 - BETA1) * g[k];
            v[k] = BETA2 * v[k] + (1.0 - BETA2) * g[k] * g[k];
            let mh = m[k] / c1;
            let vh = v[k] / c2;
            p[k] -= lr * mh / (vh.sqrt() + EPSILON);
        }
    }
    Ok(())
}
