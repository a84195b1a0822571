use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use smp_core::basis::BasisTables;
use smp_core::geometry::compute_geometry;
use smp_core::ingest::{load_config, load_dataset};
use smp_core::network::{self, load_checkpoint, save_checkpoint, FilterGrid, Model};
use smp_core::train::{self, run_ablation, split_indices, AblationSpec, SyntheticTask, TrainOptions, MIN_RELATIVE_GAP};
use smp_core::{AblationMode, Graph3D, RunConfig};

use crate::error::{io_error, CliError};
use crate::{parse_mode, Common};

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Data(format!("stdout: {e}")))
        }
    }
}

fn session_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => load_config(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => Ok(RunConfig::default()),
    }
}

fn check_threads(common: &Common) -> Result<(), CliError> {
    if common.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    Ok(())
}

pub fn featurize(input: &Path, cutoff: f64, out: &Path, common: &Common) -> Result<(), CliError> {
    check_threads(common)?;
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(CliError::Usage(format!("--cutoff must be positive, got {cutoff}")));
    }
    let graphs = load_dataset(input)?;
    let mut csv = String::from("graph_id,k,j,d,theta,phi,sender,receiver,neighbor,collinear\n");
    for g in &graphs {
        let geo = compute_geometry(g, cutoff).map_err(|e| CliError::Data(e.to_string()))?;
        let mut collinear = vec![false; geo.pairs.len()];
        for c in &geo.collinear {
            collinear[c.pair] = true;
        }
        for p in 0..geo.pairs.len() {
            let (k, j) = (geo.pairs.k[p], geo.pairs.j[p]);
            csv.push_str(&format!(
                "{},{},{},{:.16e},{:.16e},{:.16e},{},{},{},{}\n",
                g.id(),
                k,
                j,
                geo.pair_distance(p),
                geo.theta[p],
                geo.phi[p],
                geo.edges.senders[k],
                geo.edges.receivers[k],
                geo.edges.senders[j],
                u8::from(collinear[p])
            ));
        }
    }
    write_output(Some(out), &csv)
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled XYZ file or dataset manifest
    #[arg(long)]
    pub data: PathBuf,
    /// Separate validation set; otherwise `--valid-fraction` of `--data` is held out
    #[arg(long)]
    pub valid: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub valid_fraction: f64,
    /// `key: value` run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override max_epochs
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Override the ablation mode (FULL, NO_TORSION, NO_ANGLE_TORSION)
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<AblationMode>,
    /// Stop after this many optimizer steps
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Checkpoint path (best validation epoch)
    #[arg(long)]
    pub out: PathBuf,
    /// Epoch log CSV (defaults to the checkpoint path with a .csv extension)
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    check_threads(&args.common)?;
    let mut cfg = session_config(args.config.as_deref())?;
    if let Some(seed) = args.common.seed {
        cfg.seed = seed;
    }
    if let Some(e) = args.epochs {
        cfg.max_epochs = e;
    }
    if let Some(m) = args.mode {
        cfg.ablation_mode = m;
    }
    cfg.validate()?;
    if !(0.0..1.0).contains(&args.valid_fraction) {
        return Err(CliError::Usage("--valid-fraction must be in [0, 1)".into()));
    }
    let data = load_dataset(&args.data)?;
    let (train_set, valid_set): (Vec<Graph3D>, Vec<Graph3D>) = match &args.valid {
        Some(v) => (data, load_dataset(v)?),
        None => {
            let (t, v) = split_indices(data.len(), args.valid_fraction, cfg.seed);
            (t.iter().map(|&i| data[i].clone()).collect(), v.iter().map(|&i| data[i].clone()).collect())
        }
    };
    let model = Model::new(&cfg)?;
    let opts = TrainOptions { threads: args.common.threads, max_steps: args.max_steps };
    let outcome = train::train(&model, &train_set, &valid_set, &opts)?;
    save_checkpoint(&args.out, &cfg, &outcome.best).map_err(CliError::from)?;
    let log = args.log.clone().unwrap_or_else(|| args.out.with_extension("csv"));
    write_output(Some(&log), &outcome.log_csv())?;
    eprintln!(
        "trained {} steps; best epoch {} with MAE {}",
        outcome.steps, outcome.best_epoch, outcome.best_mae
    );
    Ok(())
}

pub fn eval(model_path: &Path, data: &Path, config: Option<&Path>, out: Option<&Path>, common: &Common) -> Result<(), CliError> {
    check_threads(common)?;
    let session = match config {
        Some(_) => Some(session_config(config)?),
        None => None,
    };
    let (model, params) = load_checkpoint(model_path, session.as_ref())?;
    let graphs = load_dataset(data)?;
    let report = train::evaluate(&model, &params, &graphs, common.threads)?;
    write_output(out, &report.to_text())
}

pub fn ablate(
    task: SyntheticTask,
    epochs: usize,
    seeds: usize,
    n_train: usize,
    n_test: usize,
    out: Option<&Path>,
    common: &Common,
) -> Result<(), CliError> {
    check_threads(common)?;
    if epochs == 0 || seeds == 0 || n_train == 0 || n_test == 0 {
        return Err(CliError::Usage("--epochs, --seeds, --n-train and --n-test must be positive".into()));
    }
    let spec = AblationSpec {
        task,
        n_train,
        n_test,
        epochs,
        seeds,
        base_seed: common.seed.unwrap_or(0),
        threads: common.threads,
    };
    let table = run_ablation(&spec)?;
    write_output(out, &table.to_csv())?;
    let verdict = if table.ordering_holds(MIN_RELATIVE_GAP) { "holds" } else { "does not hold" };
    eprintln!("{task}: ordering FULL < NO_TORSION < NO_ANGLE_TORSION {verdict}");
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BasisKind {
    Rbf,
    Sbf,
    Tbf,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[arg(long, value_enum, default_value = "sbf")]
    pub kind: BasisKind,
    #[arg(long, default_value_t = 5.0)]
    pub cutoff: f64,
    #[arg(long, default_value_t = 6)]
    pub n_srbf: usize,
    #[arg(long, default_value_t = 7)]
    pub n_shbf: usize,
    /// Distances c/N, 2c/N, ..., c
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = PI / 2.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

pub fn basis_dump(args: &BasisArgs) -> Result<(), CliError> {
    check_threads(&args.common)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let tables = BasisTables::new(args.cutoff, args.n_srbf, args.n_shbf)?;
    let width = match args.kind {
        BasisKind::Rbf => tables.rbf_len(),
        BasisKind::Sbf => tables.sbf_len(),
        BasisKind::Tbf => tables.tbf_len(),
    };
    let mut csv = String::from("d,theta,phi");
    for i in 0..width {
        csv.push_str(&format!(",b{i}"));
    }
    csv.push('\n');
    for s in 1..=args.samples {
        let d = args.cutoff * s as f64 / args.samples as f64;
        let row = match args.kind {
            BasisKind::Rbf => tables.rbf(d)?,
            BasisKind::Sbf => tables.sbf(d, args.theta)?,
            BasisKind::Tbf => tables.tbf(d, args.theta, args.phi)?,
        };
        csv.push_str(&format!("{d},{},{}", args.theta, args.phi));
        for v in row {
            csv.push(',');
            csv.push_str(&v.to_string());
        }
        csv.push('\n');
    }
    write_output(args.out.as_deref(), &csv)
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated torsion angles (radians)
    #[arg(long, value_delimiter = ',', default_value = "0,1.5708,3.14159,4.71239")]
    pub phi: Vec<f64>,
    /// Distances c/N, ..., c
    #[arg(long, default_value_t = 20)]
    pub d_samples: usize,
    /// Angles evenly spaced over [0, pi]
    #[arg(long, default_value_t = 20)]
    pub theta_samples: usize,
    /// Interaction block whose torsion filters are exported
    #[arg(long, default_value_t = 0)]
    pub block: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

pub fn export_filters(args: &FilterArgs) -> Result<(), CliError> {
    check_threads(&args.common)?;
    let (model, params) = load_checkpoint(&args.model, None)?;
    let c = model.config().cutoff_c;
    let grid = FilterGrid {
        d: (1..=args.d_samples).map(|i| c * i as f64 / args.d_samples as f64).collect(),
        theta: FilterGrid::linspace(0.0, PI, args.theta_samples),
        phi: args.phi.clone(),
    };
    let rows = network::export_filters(&model, &params, &grid, args.block)?;
    let mut csv = String::from("d,theta,phi");
    for i in 0..model.config().output_embed_size {
        csv.push_str(&format!(",c{i}"));
    }
    csv.push('\n');
    for r in rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    write_output(args.out.as_deref(), &csv)
}
