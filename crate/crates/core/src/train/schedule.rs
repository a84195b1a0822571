use std::f64::consts::PI;

use crate::ingest::{RunConfig, Schedule};

/// Learning rate at `step` of `steps_per_epoch` within `epoch`.
///
/// A linear warmup ramp from `warmup_factor` to 1 over `warmup_epochs`
/// multiplies the decay schedule, which changes only at epoch boundaries.
pub fn lr_at(cfg: &RunConfig, epoch: usize, step: usize, steps_per_epoch: usize) -> f64 {
    let warm = if epoch < cfg.warmup_epochs {
        let t = (epoch as f64 + step as f64 / steps_per_epoch.max(1) as f64) / cfg.warmup_epochs as f64;
        cfg.warmup_factor + (1.0 - cfg.warmup_factor) * t.min(1.0)
    } else {
        1.0
    };
    let decay = match cfg.schedule {
        Schedule::Step => cfg.decay_ratio.powi((epoch / cfg.step_size) as i32),
        Schedule::Cosine => {
            let t_max = cfg.t_max() as f64;
            0.5 * (1.0 + (PI * (epoch as f64).min(t_max) / t_max).cos())
        }
    };
    cfg.init_lr * warm * decay
}
