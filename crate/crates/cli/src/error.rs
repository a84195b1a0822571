use smp_core::basis::BasisError;
use smp_core::ingest::{ConfigError, DatasetError};
use smp_core::network::NetworkError;
use smp_core::train::TrainError;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag values (exit 1).
    Usage(String),
    /// Unreadable or invalid input files (exit 2).
    Data(String),
    /// Non-finite values or divergence (exit 3).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<BasisError> for CliError {
    fn from(e: BasisError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        let msg = e.to_string();
        match e {
            NetworkError::NonFinite { .. } => CliError::Numerical(msg),
            NetworkError::Config(_) | NetworkError::Grid(_) => CliError::Usage(msg),
            NetworkError::Basis(_)
            | NetworkError::Geometry(_)
            | NetworkError::Shape(_)
            | NetworkError::ConfigMismatch(_)
            | NetworkError::Format(_)
            | NetworkError::Io(_) => CliError::Data(msg),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        let msg = e.to_string();
        match e {
            TrainError::Network(n) => n.into(),
            TrainError::Divergence { .. } | TrainError::ZeroVariance => CliError::Numerical(msg),
            TrainError::Step(_) | TrainError::TooFewSamples { .. } | TrainError::Threads(_) => CliError::Usage(msg),
            TrainError::EmptyDataset
            | TrainError::MissingTarget { .. }
            | TrainError::Shape(_)
            | TrainError::Displacement { .. } => CliError::Data(msg),
        }
    }
}
