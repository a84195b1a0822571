//! Adam training, learning-rate schedules, metrics, finite-difference
//! forces and synthetic chain datasets.

mod ablation;
mod adam;
mod forces;
mod metrics;
mod schedule;
mod synthetic;
mod trainer;

use thiserror::Error;

use crate::ingest::GraphError;
use crate::network::NetworkError;

pub use ablation::{ablation_config, run_ablation, AblationSpec, AblationTable, MIN_RELATIVE_GAP};
pub use adam::{adam_step, OptimState, BETA1, BETA2, EPSILON};
pub use forces::{fd_forces, ForceEstimate, MAX_STEP, MIN_STEP};
pub use metrics::{ewt, mae, std_dev, MetricReport};
pub use schedule::lr_at;
pub use synthetic::{synthetic_dataset, ChainParams, SyntheticTask, ANGLE_RANGE, BOND_RANGE, MIN_SAMPLES};
pub use trainer::{
    epoch_log_csv, evaluate, predict, split_indices, train, EpochRecord, TrainOptions, TrainOutcome, GRAD_CHUNK,
};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("graph {index} has no target value")]
    MissingTarget { index: usize },
    #[error("targets have zero variance; standardized MAE is undefined")]
    ZeroVariance,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("training diverged at step {step}: {detail}")]
    Divergence { step: usize, detail: String },
    #[error("finite-difference step {0} is outside [1e-6, 1e-3]")]
    Step(f64),
    #[error("displacing atom {atom}: {source}")]
    Displacement {
        atom: usize,
        #[source]
        source: GraphError,
    },
    #[error("synthetic datasets need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },
    #[error("thread pool: {0}")]
    Threads(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}
