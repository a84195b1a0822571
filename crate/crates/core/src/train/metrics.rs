use super::TrainError;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub n_samples: usize,
    pub mae: f64,
    /// MAE divided by the population standard deviation of the targets.
    pub std_mae: f64,
    /// Fraction of samples with absolute error below the threshold.
    pub ewt: f64,
    pub ewt_threshold: f64,
}

impl MetricReport {
    pub fn compute(predictions: &[f64], targets: &[f64], ewt_threshold: f64) -> Result<Self, TrainError> {
        let mae = mae(predictions, targets)?;
        let spread = std_dev(targets);
        if spread == 0.0 {
            return Err(TrainError::ZeroVariance);
        }
        Ok(Self {
            n_samples: targets.len(),
            mae,
            std_mae: mae / spread,
            ewt: ewt(predictions, targets, ewt_threshold)?,
            ewt_threshold,
        })
    }

    pub fn to_text(&self) -> String {
        format!(
            "n_samples: {}\nmae: {}\nstd_mae: {}\newt: {}\newt_threshold: {}\n",
            self.n_samples, self.mae, self.std_mae, self.ewt, self.ewt_threshold
        )
    }
}

fn check(predictions: &[f64], targets: &[f64]) -> Result<(), TrainError> {
    if targets.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if predictions.len() != targets.len() {
        return Err(TrainError::Shape(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    Ok(())
}

pub fn mae(predictions: &[f64], targets: &[f64]) -> Result<f64, TrainError> {
    check(predictions, targets)?;
    let s: f64 = predictions.iter().zip(targets).map(|(p, t)| (p - t).abs()).sum();
    Ok(s / targets.len() as f64)
}

pub fn ewt(predictions: &[f64], targets: &[f64], threshold: f64) -> Result<f64, TrainError> {
    check(predictions, targets)?;
    let hits = predictions.iter().zip(targets).filter(|(p, t)| (*p - *t).abs() < threshold).count();
    Ok(hits as f64 / targets.len() as f64)
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}
