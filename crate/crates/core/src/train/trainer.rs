use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rayon::ThreadPool;

use super::adam::{adam_step, OptimState};
use super::metrics::MetricReport;
use super::schedule::lr_at;
use super::TrainError;
use crate::ingest::Graph3D;
use crate::network::{GraphFeatures, Gradients, Model, ModelParams};

/// Graphs handled by one gradient buffer. Fixed so the merge order, and with
/// it every bit of the result, does not depend on the thread count.
pub const GRAD_CHUNK: usize = 4;

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub threads: usize,
    /// Stop after this many optimizer steps even if epochs remain.
    pub max_steps: Option<usize>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { threads: 1, max_steps: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Learning rate of the last step taken in the epoch.
    pub lr: f64,
    /// Mean absolute error over the epoch's training forwards (before each step).
    pub train_mae: f64,
    pub valid_mae: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub last: ModelParams,
    /// Parameters with the lowest validation MAE (training MAE without a
    /// validation set).
    pub best: ModelParams,
    pub best_epoch: usize,
    pub best_mae: f64,
    pub steps: usize,
    pub log: Vec<EpochRecord>,
}

impl TrainOutcome {
    pub fn log_csv(&self) -> String {
        epoch_log_csv(&self.log)
    }
}

pub fn epoch_log_csv(log: &[EpochRecord]) -> String {
    let mut s = String::from("epoch,lr,train_mae,valid_mae\n");
    for r in log {
        let valid = r.valid_mae.map_or(String::new(), |v| v.to_string());
        s.push_str(&format!("{},{},{},{}\n", r.epoch, r.lr, r.train_mae, valid));
    }
    s
}

pub(crate) fn build_pool(threads: usize) -> Result<ThreadPool, TrainError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| TrainError::Threads(e.to_string()))
}

pub(crate) fn targets(graphs: &[Graph3D]) -> Result<Vec<f64>, TrainError> {
    graphs
        .iter()
        .enumerate()
        .map(|(i, g)| g.graph_target().ok_or(TrainError::MissingTarget { index: i }))
        .collect()
}

pub(crate) fn featurize_all(model: &Model, graphs: &[Graph3D], pool: &ThreadPool) -> Result<Vec<GraphFeatures>, TrainError> {
    pool.install(|| graphs.par_iter().map(|g| model.featurize(g)).collect::<Result<Vec<_>, _>>())
        .map_err(TrainError::from)
}

pub(crate) fn predict_features(
    model: &Model,
    params: &ModelParams,
    feats: &[GraphFeatures],
    pool: &ThreadPool,
) -> Result<Vec<f64>, TrainError> {
    pool.install(|| {
        feats
            .par_iter()
            .map(|f| model.forward(params, f).map(|fwd| fwd.energy()))
            .collect::<Result<Vec<_>, _>>()
    })
    .map_err(TrainError::from)
}

/// Predictions for every graph, in input order.
pub fn predict(model: &Model, params: &ModelParams, graphs: &[Graph3D], threads: usize) -> Result<Vec<f64>, TrainError> {
    let pool = build_pool(threads)?;
    let feats = featurize_all(model, graphs, &pool)?;
    predict_features(model, params, &feats, &pool)
}

/// MAE, standardized MAE and EwT of `params` on `graphs`.
pub fn evaluate(model: &Model, params: &ModelParams, graphs: &[Graph3D], threads: usize) -> Result<MetricReport, TrainError> {
    if graphs.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let y = targets(graphs)?;
    let p = predict(model, params, graphs, threads)?;
    MetricReport::compute(&p, &y, model.config().ewt_threshold)
}

/// Deterministic train/validation split: a seeded shuffle, the first
/// `round(n · valid_fraction)` indices go to validation.
pub fn split_indices(n: usize, valid_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x5eed_5b17);
    idx.shuffle(&mut rng);
    let n_valid = ((n as f64) * valid_fraction.clamp(0.0, 1.0)).round() as usize;
    let valid = idx[..n_valid].to_vec();
    let train = idx[n_valid..].to_vec();
    (train, valid)
}

/// L1 loss and its summed parameter gradient over one chunk of a batch.
fn chunk_gradient(
    model: &Model,
    params: &ModelParams,
    feats: &[GraphFeatures],
    y: &[f64],
    chunk: &[usize],
    scale: f64,
) -> Result<(Gradients, f64), TrainError> {
    let mut grads = Gradients::zeros_like(params);
    let mut abs_err = 0.0;
    for &i in chunk {
        let fwd = model.forward(params, &feats[i])?;
        let r = fwd.energy() - y[i];
        abs_err += r.abs();
        let sign = if r > 0.0 {
            1.0
        } else if r < 0.0 {
            -1.0
        } else {
            0.0
        };
        model.backward(params, &fwd, sign * scale, &mut grads);
    }
    Ok((grads, abs_err))
}

/// Adam on the mean absolute error of the graph targets, with
/// deterministic shuffling keyed to `(seed, epoch)`.
pub fn train(model: &Model, train: &[Graph3D], valid: &[Graph3D], opts: &TrainOptions) -> Result<TrainOutcome, TrainError> {
    if train.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let cfg = model.config();
    let pool = build_pool(opts.threads)?;
    let y_train = targets(train)?;
    let y_valid = targets(valid)?;
    let f_train = featurize_all(model, train, &pool)?;
    let f_valid = featurize_all(model, valid, &pool)?;

    let mut params = model.init_params(cfg.seed);
    let mut opt = OptimState::new(&params);
    let mut best = params.clone();
    let mut best_mae = f64::INFINITY;
    let mut best_epoch = 0;
    let mut log = Vec::new();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let steps_per_epoch = train.len().div_ceil(cfg.batch_size);
    let mut steps = 0;

    'epochs: for epoch in 0..cfg.max_epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(epoch as u64);
        order.sort_unstable();
        order.shuffle(&mut rng);

        let mut err_sum = 0.0;
        let mut seen = 0;
        let mut lr = 0.0;
        for (step, batch) in order.chunks(cfg.batch_size).enumerate() {
            if opts.max_steps.is_some_and(|m| steps >= m) {
                break;
            }
            lr = lr_at(cfg, epoch, step, steps_per_epoch);
            let scale = 1.0 / batch.len() as f64;
            let parts = pool.install(|| {
                batch
                    .par_chunks(GRAD_CHUNK)
                    .map(|c| chunk_gradient(model, &params, &f_train, &y_train, c, scale))
                    .collect::<Vec<_>>()
            });
            let mut grads: Option<Gradients> = None;
            for part in parts {
                let (g, e) = part.map_err(|e| match e {
                    TrainError::Network(source) => TrainError::Divergence { step: steps, detail: source.to_string() },
                    other => other,
                })?;
                err_sum += e;
                match &mut grads {
                    Some(acc) => acc.add_assign(&g),
                    None => grads = Some(g),
                }
            }
            let grads = grads.expect("non-empty batch");
            if !err_sum.is_finite() || !grads.scalars().all(f64::is_finite) {
                return Err(TrainError::Divergence { step: steps, detail: "non-finite loss or gradient".into() });
            }
            adam_step(&mut params, &grads, &mut opt, lr)?;
            seen += batch.len();
            steps += 1;
        }
        if seen == 0 {
            break 'epochs;
        }
        let train_mae = err_sum / seen as f64;
        let valid_mae = if f_valid.is_empty() {
            None
        } else {
            let p = predict_features(model, &params, &f_valid, &pool)?;
            Some(super::metrics::mae(&p, &y_valid)?)
        };
        let score = valid_mae.unwrap_or(train_mae);
        if score < best_mae {
            best_mae = score;
            best_epoch = epoch;
            best = params.clone();
        }
        log.push(EpochRecord { epoch, lr, train_mae, valid_mae });
        if opts.max_steps.is_some_and(|m| steps >= m) {
            break;
        }
    }
    Ok(TrainOutcome { last: params, best, best_epoch, best_mae, steps, log })
}
