//! Run configuration: every model, schedule and evaluation hyperparameter.
//!
//! The on-disk form is flat `key: value` text (`key = value` also works);
//! `#` starts a comment. Keys left out take the defaults below.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Highest supported harmonic degree, so `n_shbf <= MAX_DEGREE + 1`.
pub const MAX_DEGREE: usize = 16;
/// Highest supported radial root index.
pub const MAX_ROOTS: usize = 64;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config line {line}: expected `key: value`")]
    Syntax { line: usize },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config key {key:?}: cannot parse {value:?}")]
    BadValue { key: String, value: String },
    #[error("config key {key:?}: {message}")]
    OutOfRange { key: &'static str, message: String },
    #[error("unknown ablation mode {0:?} (expected FULL, NO_TORSION or NO_ANGLE_TORSION)")]
    UnknownMode(String),
    #[error("unknown learning-rate schedule {0:?} (expected step or cosine)")]
    UnknownSchedule(String),
}

/// Which geometry enters the interaction blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AblationMode {
    /// Distance, angle and torsion.
    #[serde(rename = "FULL")]
    Full,
    /// Distance and angle only.
    #[serde(rename = "NO_TORSION")]
    NoTorsion,
    /// Distance only.
    #[serde(rename = "NO_ANGLE_TORSION")]
    NoAngleTorsion,
}

impl AblationMode {
    pub const ALL: [AblationMode; 3] =
        [AblationMode::Full, AblationMode::NoTorsion, AblationMode::NoAngleTorsion];

    pub fn uses_angle(self) -> bool {
        !matches!(self, AblationMode::NoAngleTorsion)
    }

    pub fn uses_torsion(self) -> bool {
        matches!(self, AblationMode::Full)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AblationMode::Full => "FULL",
            AblationMode::NoTorsion => "NO_TORSION",
            AblationMode::NoAngleTorsion => "NO_ANGLE_TORSION",
        }
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "FULL" => Ok(AblationMode::Full),
            "NO_TORSION" => Ok(AblationMode::NoTorsion),
            "NO_ANGLE_TORSION" => Ok(AblationMode::NoAngleTorsion),
            _ => Err(ConfigError::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// Multiply by `decay_ratio` every `step_size` epochs.
    Step,
    /// Half-cosine decay to zero at `t_max`.
    Cosine,
}

impl FromStr for Schedule {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "step" | "steplr" => Ok(Schedule::Step),
            "cosine" | "cosineannealinglr" => Ok(Schedule::Cosine),
            _ => Err(ConfigError::UnknownSchedule(s.to_string())),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::Step => "step",
            Schedule::Cosine => "cosine",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Radius-graph cutoff in Å.
    pub cutoff_c: f64,
    /// Radial basis size.
    pub n_srbf: usize,
    /// Number of harmonic degrees (`l = 0..n_shbf`).
    pub n_shbf: usize,
    pub num_interaction_blocks: usize,
    pub embed_size: usize,
    pub int_size_distance: usize,
    pub int_size_angle: usize,
    pub int_size_torsion: usize,
    pub output_embed_size: usize,
    /// Neighbor-message layers before aggregation; the last one projects down
    /// to `output_embed_size`.
    pub pre_aggregation_layers: usize,
    /// Residual blocks after the skip connection in every interaction block.
    pub residual_blocks: usize,
    pub batch_size: usize,
    pub init_lr: f64,
    pub schedule: Schedule,
    pub decay_ratio: f64,
    pub step_size: usize,
    /// Cosine horizon in epochs; `None` means `max_epochs`.
    pub t_max: Option<usize>,
    pub warmup_epochs: usize,
    pub warmup_factor: f64,
    pub max_epochs: usize,
    pub ablation_mode: AblationMode,
    pub seed: u64,
    /// EwT threshold in eV.
    pub ewt_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cutoff_c: 5.0,
            n_srbf: 6,
            n_shbf: 7,
            num_interaction_blocks: 4,
            embed_size: 256,
            int_size_distance: 8,
            int_size_angle: 8,
            int_size_torsion: 8,
            output_embed_size: 64,
            pre_aggregation_layers: 2,
            residual_blocks: 2,
            batch_size: 32,
            init_lr: 5e-4,
            schedule: Schedule::Step,
            decay_ratio: 0.5,
            step_size: 50,
            t_max: None,
            warmup_epochs: 3,
            warmup_factor: 0.2,
            max_epochs: 100,
            ablation_mode: AblationMode::Full,
            seed: 0,
            ewt_threshold: 0.02,
        }
    }
}

fn positive(key: &'static str, v: usize) -> Result<(), ConfigError> {
    if v == 0 {
        return Err(ConfigError::OutOfRange { key, message: "must be at least 1".into() });
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.cutoff_c.is_finite() && self.cutoff_c > 0.0) {
            return Err(ConfigError::OutOfRange {
                key: "cutoff_c",
                message: format!("{} is not a positive length", self.cutoff_c),
            });
        }
        positive("n_srbf", self.n_srbf)?;
        positive("n_shbf", self.n_shbf)?;
        if self.n_srbf > MAX_ROOTS {
            return Err(ConfigError::OutOfRange {
                key: "n_srbf",
                message: format!("at most {MAX_ROOTS} radial roots are supported"),
            });
        }
        if self.n_shbf > MAX_DEGREE + 1 {
            return Err(ConfigError::OutOfRange {
                key: "n_shbf",
                message: format!("degrees above {MAX_DEGREE} are not supported"),
            });
        }
        positive("embed_size", self.embed_size)?;
        positive("int_size_distance", self.int_size_distance)?;
        positive("int_size_angle", self.int_size_angle)?;
        positive("int_size_torsion", self.int_size_torsion)?;
        positive("output_embed_size", self.output_embed_size)?;
        positive("pre_aggregation_layers", self.pre_aggregation_layers)?;
        positive("batch_size", self.batch_size)?;
        positive("step_size", self.step_size)?;
        positive("max_epochs", self.max_epochs)?;
        if let Some(t) = self.t_max {
            positive("t_max", t)?;
        }
        if !(self.init_lr.is_finite() && self.init_lr > 0.0) {
            return Err(ConfigError::OutOfRange {
                key: "init_lr",
                message: format!("{} is not positive", self.init_lr),
            });
        }
        if !(self.warmup_factor > 0.0 && self.warmup_factor <= 1.0) {
            return Err(ConfigError::OutOfRange {
                key: "warmup_factor",
                message: format!("{} is outside (0, 1]", self.warmup_factor),
            });
        }
        if !(self.decay_ratio > 0.0 && self.decay_ratio <= 1.0) {
            return Err(ConfigError::OutOfRange {
                key: "decay_ratio",
                message: format!("{} is outside (0, 1]", self.decay_ratio),
            });
        }
        if !(self.ewt_threshold.is_finite() && self.ewt_threshold > 0.0) {
            return Err(ConfigError::OutOfRange {
                key: "ewt_threshold",
                message: format!("{} is not positive", self.ewt_threshold),
            });
        }
        Ok(())
    }

    pub fn t_max(&self) -> usize {
        self.t_max.unwrap_or(self.max_epochs)
    }

    /// True when both configs build identically shaped models over the same
    /// geometry, i.e. a checkpoint from one is usable under the other.
    pub fn same_architecture(&self, other: &RunConfig) -> bool {
        self.cutoff_c.to_bits() == other.cutoff_c.to_bits()
            && self.n_srbf == other.n_srbf
            && self.n_shbf == other.n_shbf
            && self.num_interaction_blocks == other.num_interaction_blocks
            && self.embed_size == other.embed_size
            && self.int_size_distance == other.int_size_distance
            && self.int_size_angle == other.int_size_angle
            && self.int_size_torsion == other.int_size_torsion
            && self.output_embed_size == other.output_embed_size
            && self.pre_aggregation_layers == other.pre_aggregation_layers
            && self.residual_blocks == other.residual_blocks
            && self.ablation_mode == other.ablation_mode
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        match key {
            "cutoff_c" | "cutoff" => self.cutoff_c = num(key, value)?,
            "n_srbf" => self.n_srbf = num(key, value)?,
            "n_shbf" => self.n_shbf = num(key, value)?,
            "num_interaction_blocks" => self.num_interaction_blocks = num(key, value)?,
            "embed_size" => self.embed_size = num(key, value)?,
            "int_size_distance" => self.int_size_distance = num(key, value)?,
            "int_size_angle" => self.int_size_angle = num(key, value)?,
            "int_size_torsion" => self.int_size_torsion = num(key, value)?,
            "output_embed_size" => self.output_embed_size = num(key, value)?,
            "pre_aggregation_layers" => self.pre_aggregation_layers = num(key, value)?,
            "residual_blocks" => self.residual_blocks = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "init_lr" => self.init_lr = num(key, value)?,
            "schedule" => self.schedule = value.parse()?,
            "decay_ratio" => self.decay_ratio = num(key, value)?,
            "step_size" => self.step_size = num(key, value)?,
            "t_max" => {
                self.t_max = match value {
                    "none" | "max_epochs" => None,
                    v => Some(num(key, v)?),
                }
            }
            "warmup_epochs" => self.warmup_epochs = num(key, value)?,
            "warmup_factor" => self.warmup_factor = num(key, value)?,
            "max_epochs" => self.max_epochs = num(key, value)?,
            "ablation_mode" | "mode" => self.ablation_mode = value.parse()?,
            "seed" => self.seed = num(key, value)?,
            "ewt_threshold" => self.ewt_threshold = num(key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey { line, key: key.to_string() });
            }
        }
        Ok(())
    }

    /// Render as `key: value` text; [`parse_config`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let t_max = self.t_max.map_or("none".to_string(), |t| t.to_string());
        let rows: [(&str, String); 23] = [
            ("cutoff_c", format!("{:?}", self.cutoff_c)),
            ("n_srbf", self.n_srbf.to_string()),
            ("n_shbf", self.n_shbf.to_string()),
            ("num_interaction_blocks", self.num_interaction_blocks.to_string()),
            ("embed_size", self.embed_size.to_string()),
            ("int_size_distance", self.int_size_distance.to_string()),
            ("int_size_angle", self.int_size_angle.to_string()),
            ("int_size_torsion", self.int_size_torsion.to_string()),
            ("output_embed_size", self.output_embed_size.to_string()),
            ("pre_aggregation_layers", self.pre_aggregation_layers.to_string()),
            ("residual_blocks", self.residual_blocks.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("init_lr", format!("{:?}", self.init_lr)),
            ("schedule", self.schedule.to_string()),
            ("decay_ratio", format!("{:?}", self.decay_ratio)),
            ("step_size", self.step_size.to_string()),
            ("t_max", t_max),
            ("warmup_epochs", self.warmup_epochs.to_string()),
            ("warmup_factor", format!("{:?}", self.warmup_factor)),
            ("max_epochs", self.max_epochs.to_string()),
            ("ablation_mode", self.ablation_mode.to_string()),
            ("seed", self.seed.to_string()),
            ("ewt_threshold", format!("{:?}", self.ewt_threshold)),
        ];
        rows.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .or_else(|| line.split_once('='))
            .ok_or(ConfigError::Syntax { line: i + 1 })?;
        cfg.set(key.trim(), value.trim(), i + 1)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
    parse_config(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_fixed_basis_sizes() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.n_srbf, 6);
        assert_eq!(cfg.n_shbf, 7);
        assert_eq!(cfg.cutoff_c, 5.0);
        assert_eq!(cfg.ewt_threshold, 0.02);
        assert_eq!(cfg.embed_size, 256);
        assert_eq!(cfg.warmup_factor, 0.2);
    }

    #[test]
    fn single_override_keeps_other_defaults() {
        let cfg = parse_config("cutoff_c: 6\n").unwrap();
        assert_eq!(cfg.cutoff_c, 6.0);
        assert_eq!(RunConfig { cutoff_c: 5.0, ..cfg }, RunConfig::default());
    }

    #[test]
    fn range_and_mode_errors() {
        assert!(matches!(
            parse_config("n_srbf: 0"),
            Err(ConfigError::OutOfRange { key: "n_srbf", .. })
        ));
        assert!(matches!(parse_config("n_shbf: 18"), Err(ConfigError::OutOfRange { .. })));
        assert!(matches!(parse_config("warmup_factor: 0"), Err(ConfigError::OutOfRange { .. })));
        assert!(matches!(parse_config("decay_ratio: 1.5"), Err(ConfigError::OutOfRange { .. })));
        assert!(matches!(parse_config("cutoff_c: -1"), Err(ConfigError::OutOfRange { .. })));
        assert!(matches!(parse_config("ablation_mode: HALF"), Err(ConfigError::UnknownMode(_))));
        assert!(matches!(parse_config("colour: red"), Err(ConfigError::UnknownKey { line: 1, .. })));
        assert!(matches!(parse_config("n_srbf: six"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(parse_config("just words"), Err(ConfigError::Syntax { line: 1 })));
    }

    #[test]
    fn text_round_trip() {
        let cfg = parse_config(
            "# grid point\nablation_mode = NO_TORSION\nschedule: cosine\nt_max: 40\ninit_lr: 1e-3\nseed: 9\n",
        )
        .unwrap();
        assert_eq!(cfg.ablation_mode, AblationMode::NoTorsion);
        assert_eq!(cfg.t_max(), 40);
        assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(parse_config(&RunConfig::default().to_text()).unwrap(), RunConfig::default());
    }
}
