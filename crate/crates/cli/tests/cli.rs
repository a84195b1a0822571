use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use smp_core::ingest::write_xyz;
use smp_core::train::{synthetic_dataset, SyntheticTask};

const SUBCOMMANDS: [&str; 6] = ["featurize", "train", "eval", "ablate", "basis-dump", "export-filters"];

const TINY_CONFIG: &str = "\
cutoff_c: 2.0
n_srbf: 3
n_shbf: 3
num_interaction_blocks: 1
embed_size: 8
int_size_distance: 4
int_size_angle: 4
int_size_torsion: 4
output_embed_size: 6
residual_blocks: 1
batch_size: 8
max_epochs: 3
warmup_epochs: 1
";

fn smp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smp")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let data = synthetic_dataset(SyntheticTask::Torsion, 64, 3).unwrap();
    fs::write(dir.path().join("train.xyz"), write_xyz(&data)).unwrap();
    fs::write(dir.path().join("tiny.cfg"), TINY_CONFIG).unwrap();
    dir
}

#[test]
fn help_lists_common_flags() {
    let dir = tempfile::tempdir().unwrap();
    for sub in SUBCOMMANDS {
        let o = smp(dir.path(), &[sub, "--help"]);
        assert_eq!(code(&o), 0, "{sub}");
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.contains("--seed") && text.contains("--threads"), "{sub}: {text}");
    }
    assert_eq!(code(&smp(dir.path(), &["--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(code(&smp(d, &[])), 1);
    assert_eq!(code(&smp(d, &["frobnicate"])), 1);
    assert_eq!(code(&smp(d, &["basis-dump", "--bogus", "1"])), 1);
    assert_eq!(code(&smp(d, &["basis-dump", "--samples", "x"])), 1);
    assert_eq!(code(&smp(d, &["featurize", "--input", "train.xyz", "--cutoff", "-1", "--out", "g.csv"])), 1);
    assert_eq!(code(&smp(d, &["basis-dump", "--n-shbf", "40"])), 1);
    let o = smp(d, &["train", "--data", "train.xyz", "--out", "m.bin", "--threads", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error: "));
}

#[test]
fn data_errors_exit_two() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(code(&smp(d, &["featurize", "--input", "nope.xyz", "--out", "g.csv"])), 2);
    fs::write(d.join("bad.xyz"), "2\n\nC 0 0 0\nQq 1 0 0\n").unwrap();
    assert_eq!(code(&smp(d, &["featurize", "--input", "bad.xyz", "--out", "g.csv"])), 2);
    fs::write(d.join("junk.bin"), b"not a model").unwrap();
    assert_eq!(code(&smp(d, &["eval", "--model", "junk.bin", "--data", "train.xyz"])), 2);
    fs::write(d.join("bad.cfg"), "embed_size: many\n").unwrap();
    assert_eq!(code(&smp(d, &["train", "--data", "train.xyz", "--config", "bad.cfg", "--out", "m.bin"])), 2);
}

#[test]
fn numerical_failure_exits_three() {
    let dir = setup();
    let d = dir.path();
    let cfg = format!("{TINY_CONFIG}init_lr: 1e300\nwarmup_epochs: 0\n");
    fs::write(d.join("hot.cfg"), cfg).unwrap();
    let o = smp(d, &["train", "--data", "train.xyz", "--config", "hot.cfg", "--out", "m.bin"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn featurize_reports_the_dihedral() {
    // H-O-O-H with a 111.5° dihedral: around the O-O edge the two hydrogens
    // split the full turn into psi and 2π - psi
    let psi = 111.5f64.to_radians();
    let (oh, oo, angle) = (0.95f64, 1.47f64, 100f64.to_radians());
    let h1 = [oh * angle.sin(), -oo / 2.0 + oh * angle.cos().abs(), 0.0];
    let h2 = [oh * angle.sin() * psi.cos(), oo / 2.0 - oh * angle.cos().abs(), oh * angle.sin() * psi.sin()];
    let xyz = format!(
        "4\nid=h2o2\nO 0 {} 0\nO 0 {} 0\nH {} {} {}\nH {} {} {}\n",
        -oo / 2.0,
        oo / 2.0,
        h1[0],
        h1[1],
        h1[2],
        h2[0],
        h2[1],
        h2[2]
    );
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h2o2.xyz"), xyz).unwrap();
    let o = smp(dir.path(), &["featurize", "--input", "h2o2.xyz", "--cutoff", "5.0", "--out", "geom.csv"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("geom.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let mut seen = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (s, r, n) = (f[col("sender")], f[col("receiver")], f[col("neighbor")]);
        // edges between the oxygens (atoms 0 and 1), neighbors are hydrogens
        if (s, r) == ("0", "1") || (s, r) == ("1", "0") {
            assert!(n == "2" || n == "3");
            let phi: f64 = f[col("phi")].parse().unwrap();
            assert!((phi - psi).abs() < 1e-9 || (phi - (TAU - psi)).abs() < 1e-9, "phi {phi}");
            seen += 1;
        }
    }
    assert_eq!(seen, 4);
}

#[test]
fn train_eval_export_round_trip() {
    let dir = setup();
    let d = dir.path();
    let o = smp(d, &["train", "--data", "train.xyz", "--config", "tiny.cfg", "--out", "m.bin", "--seed", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let log = fs::read_to_string(d.join("m.csv")).unwrap();
    assert_eq!(log.lines().count(), 4);
    assert!(log.starts_with("epoch,lr,train_mae,valid_mae\n"));

    let o = smp(d, &["eval", "--model", "m.bin", "--data", "train.xyz", "--config", "tiny.cfg"]);
    assert_eq!(code(&o), 0);
    let report = String::from_utf8(o.stdout).unwrap();
    for key in ["n_samples: 64", "mae: ", "std_mae: ", "ewt: "] {
        assert!(report.contains(key), "{report}");
    }
    let other = TINY_CONFIG.replace("embed_size: 8", "embed_size: 10");
    fs::write(d.join("other.cfg"), other).unwrap();
    assert_eq!(code(&smp(d, &["eval", "--model", "m.bin", "--data", "train.xyz", "--config", "other.cfg"])), 2);

    let o = smp(d, &["export-filters", "--model", "m.bin", "--phi", "0,1.5708,3.14159,4.71239", "--d-samples", "3", "--theta-samples", "2", "--out", "f.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f = fs::read_to_string(d.join("f.csv")).unwrap();
    let rows: Vec<&str> = f.lines().collect();
    assert_eq!(rows[0], "d,theta,phi,c0,c1,c2,c3,c4,c5");
    assert_eq!(rows.len(), 1 + 3 * 2 * 4);
    let phis: Vec<&str> = rows[1..5].iter().map(|r| r.split(',').nth(2).unwrap()).collect();
    assert_eq!(phis, ["0", "1.5708", "3.14159", "4.71239"]);
    assert_eq!(code(&smp(d, &["export-filters", "--model", "m.bin", "--block", "5"])), 1);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let dir = setup();
    let d = dir.path();
    let mut runs = Vec::new();
    for (i, threads) in ["1", "1", "4"].iter().enumerate() {
        let out = format!("m{i}.bin");
        let o = smp(d, &["train", "--data", "train.xyz", "--config", "tiny.cfg", "--out", &out, "--threads", threads]);
        assert_eq!(code(&o), 0);
        runs.push((fs::read(d.join(&out)).unwrap(), fs::read(d.join(format!("m{i}.csv"))).unwrap()));
    }
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
    let a = smp(d, &["basis-dump", "--kind", "tbf", "--samples", "5", "--seed", "1"]);
    let b = smp(d, &["basis-dump", "--kind", "tbf", "--samples", "5", "--seed", "2"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn basis_dump_shapes() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, width) in [("rbf", 6), ("sbf", 42), ("tbf", 294)] {
        let o = smp(dir.path(), &["basis-dump", "--kind", kind, "--samples", "4"]);
        assert_eq!(code(&o), 0);
        let text = String::from_utf8(o.stdout).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().all(|l| l.split(',').count() == 3 + width));
        // the last sample sits on the cutoff, where every function vanishes
        assert!(lines[4].split(',').skip(3).all(|v| v.parse::<f64>().unwrap() == 0.0));
    }
}

#[test]
fn ablate_emits_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = smp(dir.path(), &["ablate", "--task", "length", "--epochs", "1", "--seeds", "1", "--n-train", "48", "--n-test", "16"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("run,FULL,NO_TORSION,NO_ANGLE_TORSION\n0,"));
    assert!(text.lines().last().unwrap().starts_with("median,"));
    assert_eq!(code(&smp(dir.path(), &["ablate", "--task", "dihedral"])), 1);
}
