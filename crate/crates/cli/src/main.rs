//! `smp`: featurize structures, train and evaluate models, run ablations and
//! dump bases or learned filters.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use smp_core::train::SyntheticTask;
use smp_core::AblationMode;

#[derive(Debug, Parser)]
#[command(name = "smp", version, about = "Spherical message passing on 3D graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Random seed (overrides the config file when given)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write per-pair geometry (d, theta, phi) as CSV
    Featurize {
        /// XYZ file (one or more frames) or dataset manifest
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 5.0)]
        cutoff: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train a model and write the best checkpoint plus an epoch log
    Train(commands::TrainArgs),
    /// Evaluate a checkpoint on a labeled dataset
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Session config; must match the checkpoint architecture
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Train all three geometry modes on a synthetic chain task
    Ablate {
        #[arg(long, default_value = "torsion")]
        task: SyntheticTask,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        /// Number of independent seeds
        #[arg(long, default_value_t = 3)]
        seeds: usize,
        #[arg(long, default_value_t = 512)]
        n_train: usize,
        #[arg(long, default_value_t = 128)]
        n_test: usize,
        /// Table file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample a basis on a distance grid as CSV
    BasisDump(commands::BasisArgs),
    /// Evaluate the torsion filters of a checkpoint on a (d, theta, phi) grid
    ExportFilters(commands::FilterArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Featurize { input, cutoff, out, common } => commands::featurize(&input, cutoff, &out, &common),
        Command::Train(args) => commands::train(&args),
        Command::Eval { model, data, config, out, common } => {
            commands::eval(&model, &data, config.as_deref(), out.as_deref(), &common)
        }
        Command::Ablate { task, epochs, seeds, n_train, n_test, out, common } => {
            commands::ablate(task, epochs, seeds, n_train, n_test, out.as_deref(), &common)
        }
        Command::BasisDump(args) => commands::basis_dump(&args),
        Command::ExportFilters(args) => commands::export_filters(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

pub(crate) fn parse_mode(s: &str) -> Result<AblationMode, String> {
    s.parse::<AblationMode>().map_err(|e| e.to_string())
}
