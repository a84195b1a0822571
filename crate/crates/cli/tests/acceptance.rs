//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p smp-cli --test acceptance`.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gauss_quad::GaussLegendre;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smp_core::basis::{bessel_roots, lm_index, BasisTables};
use smp_core::geometry::{
    build_radius_graph, build_two_hop_index, compute_torsions, random_cluster, random_motion, rigid_transform,
    DirectedEdgeList,
};
use smp_core::ingest::write_xyz;
use smp_core::network::{Gradients, Model, ParamKind};
use smp_core::train::{
    ablation_config, fd_forces, mae, predict, run_ablation, std_dev, synthetic_dataset, train, AblationSpec,
    SyntheticTask, TrainOptions, MIN_RELATIVE_GAP,
};
use smp_core::{AblationMode, RunConfig, Schedule};

struct Outcome {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gl(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(n.try_into().unwrap()).as_node_weight_pairs().to_vec()
}

/// Root of `j_1`, i.e. of `sin x - x cos x`, by plain bisection on the
/// closed form.
fn j1_first_root() -> f64 {
    let f = |x: f64| x.sin() - x * x.cos();
    let (mut lo, mut hi) = (PI, 1.5 * PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(lo).signum() == f(mid).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest deviation from the identity of the Gram matrix of the full
/// (d, θ, φ) basis on the ball of radius `c`.
fn tbf_gram_error(t: &BasisTables) -> f64 {
    let len = t.tbf_len();
    let c = t.cutoff();
    let ns = t.n_shbf();
    let radial = gl(160);
    let polar = gl(ns + 2);
    let n_phi = 4 * ns;
    let mut gram = vec![0.0; len * len];
    let mut v = vec![0.0; len];
    for &(x, wr) in &radial {
        let d = 0.5 * c * (x + 1.0);
        for &(u, wu) in &polar {
            let theta = u.acos();
            for q in 0..n_phi {
                let phi = TAU * q as f64 / n_phi as f64;
                t.tbf_into(d, theta, phi, &mut v);
                let w = 0.5 * c * wr * d * d * wu * TAU / n_phi as f64;
                for a in 0..len {
                    let wa = w * v[a];
                    for b in a..len {
                        gram[a * len + b] += wa * v[b];
                    }
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..len {
        for b in a..len {
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((gram[a * len + b] - want).abs());
        }
    }
    worst
}

/// Gram error of a radial family `f(d)` of `len` functions over [0, c].
fn radial_gram_error(c: f64, len: usize, f: impl Fn(f64) -> Vec<f64>) -> f64 {
    let mut gram = vec![0.0; len * len];
    for (x, w) in gl(160) {
        let d = 0.5 * c * (x + 1.0);
        let v = f(d);
        for a in 0..len {
            for b in 0..len {
                gram[a * len + b] += 0.5 * c * w * d * d * v[a] * v[b];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..len {
        for b in 0..len {
            worst = worst.max((gram[a * len + b] - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

fn basis_correctness() -> Outcome {
    let mut worst: f64 = 0.0;
    for &(nr, ns) in &[(3, 3), (6, 7)] {
        let t = BasisTables::new(5.0, nr, ns).unwrap();
        worst = worst.max(radial_gram_error(5.0, nr, |d| t.rbf(d).unwrap()));
        // radial parts of the angle basis: divide out Y_l^0 at θ = 0
        let y0: Vec<f64> = (0..ns).map(|l| ((2 * l + 1) as f64 / (4.0 * PI)).sqrt()).collect();
        for l in 0..ns {
            worst = worst.max(radial_gram_error(5.0, nr, |d| {
                let s = t.sbf(d, 0.0).unwrap();
                (0..nr).map(|n| s[l * nr + n] / y0[l]).collect()
            }));
            let m0 = lm_index(l, 0);
            worst = worst.max(radial_gram_error(5.0, nr, |d| {
                let s = t.tbf(d, 0.0, 0.0).unwrap();
                (0..nr).map(|n| s[m0 * nr + n] / y0[l]).collect()
            }));
        }
        worst = worst.max(tbf_gram_error(&t));
    }
    let roots = bessel_roots(1, 10).unwrap();
    let zero_order = (1..=10).map(|n| (roots[0][n - 1] - n as f64 * PI).abs()).fold(0.0, f64::max);
    let oracle = j1_first_root();
    let z11 = (roots[1][0] - oracle).abs().max((roots[1][0] - 4.4934094579).abs());
    let pass = worst < 1e-6 && zero_order < 1e-12 && z11 < 1e-9;
    verdict(pass, format!("gram err {worst:.1e} (<1e-6), |z0n - nπ| {zero_order:.1e} (<1e-12), |z11 - oracle| {z11:.1e} (<1e-9)"))
}

fn brute_force_pairs(e: &DirectedEdgeList) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..e.len() {
        for j in 0..e.len() {
            if e.receivers[j] == e.senders[k] && e.senders[j] != e.receivers[k] {
                out.push((k, j));
            }
        }
    }
    out
}

fn geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e0);
    let (mut graphs, mut edges_checked, mut worst) = (0, 0usize, 0.0f64);
    while graphs < 1000 {
        let n = rng.random_range(3..=12);
        let g = random_cluster(&mut rng, n, 3.0, 0.7);
        let e = build_radius_graph(&g, 2.5).unwrap();
        let p = build_two_hop_index(&e);
        let tor = compute_torsions(&g, &e, &p);
        let mut any = false;
        for k in 0..e.len() {
            if tor.counts[k] >= 2 {
                let sum: f64 = p.range(k).map(|q| tor.phi[q]).sum();
                worst = worst.max((sum - TAU).abs());
                edges_checked += 1;
                any = true;
            }
        }
        graphs += usize::from(any);
    }
    let mut mismatches = 0;
    let mut small = 0;
    for n in 1..=6 {
        for _ in 0..500 {
            let g = random_cluster(&mut rng, n, 2.5, 0.5);
            let cutoff = rng.random_range(0.8..4.0);
            let e = build_radius_graph(&g, cutoff).unwrap();
            let p = build_two_hop_index(&e);
            let fast: Vec<_> = p.k.iter().copied().zip(p.j.iter().copied()).collect();
            mismatches += usize::from(fast != brute_force_pairs(&e));
            small += 1;
        }
    }
    verdict(
        worst < 1e-9 && mismatches == 0,
        format!("closure err {worst:.1e} over {edges_checked} edges in {graphs} graphs (<1e-9); {mismatches}/{small} two-hop mismatches"),
    )
}

fn invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a7);
    let g = random_cluster(&mut rng, 9, 2.5, 0.8);
    let mut worst: f64 = 0.0;
    for mode in AblationMode::ALL {
        let model = Model::new(&RunConfig { ablation_mode: mode, ..RunConfig::default() }).unwrap();
        let params = model.init_params(3);
        let base = model.predict(&params, &g).unwrap();
        for _ in 0..100 {
            let (r, s) = random_motion(&mut rng, 20.0);
            let moved = rigid_transform(&g, &r, s).unwrap();
            worst = worst.max((model.predict(&params, &moved).unwrap() - base).abs());
        }
    }
    verdict(worst < 1e-9, format!("max |ΔE| {worst:.1e} over 100 motions x 3 modes (<1e-9)"))
}

fn gradients() -> Outcome {
    let cfg = RunConfig {
        n_srbf: 3,
        n_shbf: 3,
        num_interaction_blocks: 2,
        embed_size: 8,
        int_size_distance: 4,
        int_size_angle: 4,
        int_size_torsion: 4,
        output_embed_size: 6,
        pre_aggregation_layers: 2,
        residual_blocks: 1,
        cutoff_c: 3.0,
        ..RunConfig::default()
    };
    let model = Model::new(&cfg).unwrap();
    let mut params = model.init_params(5);
    for (i, spec) in model.layout().specs().to_vec().iter().enumerate() {
        if spec.kind == ParamKind::Bias {
            for (k, v) in params.tensor_mut(i).data_mut().iter_mut().enumerate() {
                *v = 0.1 * ((k + 3 * i) as f64).cos();
            }
        }
    }
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(0x9d);
    let (mut worst, mut checked) = (0.0f64, 0usize);
    for _ in 0..5 {
        let f = model.featurize(&random_cluster(&mut rng, 5, 2.5, 0.8)).unwrap();
        let fwd = model.forward(&params, &f).unwrap();
        let mut grads = Gradients::zeros_like(&params);
        model.backward(&params, &fwd, 1.0, &mut grads);
        for id in 0..model.layout().len() {
            for k in 0..params.tensor(id).data().len() {
                let orig = params.tensor(id).data()[k];
                params.tensor_mut(id).data_mut()[k] = orig + h;
                let up = model.forward(&params, &f).unwrap().energy();
                params.tensor_mut(id).data_mut()[k] = orig - h;
                let dn = model.forward(&params, &f).unwrap().energy();
                params.tensor_mut(id).data_mut()[k] = orig;
                let fd = (up - dn) / (2.0 * h);
                let g = grads.tensor(id).data()[k];
                worst = worst.max((g - fd).abs() / g.abs().max(fd.abs()).max(1e-4));
                checked += 1;
            }
        }
    }
    verdict(worst < 1e-5, format!("max rel err {worst:.1e} over {checked} parameter checks (<1e-5)"))
}

fn ablation() -> Outcome {
    let table = run_ablation(&AblationSpec::default()).unwrap();
    let [full, no_t, none] = table.medians();
    let pass = table.ordering_holds(MIN_RELATIVE_GAP);
    verdict(
        pass,
        format!(
            "median test MAE FULL {full:.4} < NO_TORSION {no_t:.4} < NO_ANGLE_TORSION {none:.4}, gaps {:.0}% / {:.0}% (>=20%)",
            100.0 * (1.0 - full / no_t),
            100.0 * (1.0 - no_t / none)
        ),
    )
}

fn overfit() -> Outcome {
    let data = synthetic_dataset(SyntheticTask::Torsion, 64, 7).unwrap();
    let data = &data[..32];
    let cfg = RunConfig {
        batch_size: 32,
        warmup_epochs: 5,
        max_epochs: 2000,
        ..ablation_config(AblationMode::Full, 0, 2000)
    };
    let model = Model::new(&cfg).unwrap();
    let out = train(&model, data, &[], &TrainOptions { threads: 1, max_steps: Some(2000) }).unwrap();
    let y: Vec<f64> = data.iter().map(|g| g.graph_target().unwrap()).collect();
    let p = predict(&model, &out.last, data, 1).unwrap();
    let ratio = mae(&p, &y).unwrap() / std_dev(&y);
    verdict(out.steps <= 2000 && ratio < 0.01, format!("train MAE / std {ratio:.4} after {} steps (<0.01)", out.steps))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = synthetic_dataset(SyntheticTask::Torsion, 96, 11).unwrap();
    fs::write(d.join("data.xyz"), write_xyz(&data)).unwrap();
    let cfg = RunConfig { schedule: Schedule::Cosine, ..ablation_config(AblationMode::Full, 9, 4) };
    fs::write(d.join("run.cfg"), cfg.to_text()).unwrap();
    let mut runs = Vec::new();
    for (i, threads) in ["1", "1", "4", "4"].iter().enumerate() {
        let out = d.join(format!("m{i}.bin"));
        let status = Command::new(env!("CARGO_BIN_EXE_smp"))
            .current_dir(d)
            .args(["train", "--data", "data.xyz", "--config", "run.cfg", "--seed", "9", "--threads", threads])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return verdict(false, format!("train failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        runs.push((fs::read(&out).unwrap(), fs::read(out.with_extension("csv")).unwrap()));
    }
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    verdict(same, format!("4 runs (threads 1,1,4,4): checkpoints {} bytes, logs {} bytes, identical: {same}", runs[0].0.len(), runs[0].1.len()))
}

fn forces() -> Outcome {
    let model = Model::new(&RunConfig::default()).unwrap();
    let params = model.init_params(8);
    let mut rng = ChaCha8Rng::seed_from_u64(0xf0);
    let (mut worst, mut crossings) = (0.0f64, 0usize);
    for _ in 0..20 {
        let n = rng.random_range(3..=8);
        let g = random_cluster(&mut rng, n, 2.5, 0.8);
        let est = fd_forces(&model, &params, &g, 1e-4).unwrap();
        crossings += est.crossings.len();
        let s = est.net_force();
        worst = worst.max((s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt());
    }
    verdict(worst < 1e-5 && crossings == 0, format!("max |Σ F| {worst:.1e} eV/Å on 20 graphs (<1e-5), {crossings} cutoff crossings"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Option<Duration>, fn() -> Outcome); 8] = [
        ("basis correctness", Some(Duration::from_secs(10)), basis_correctness),
        ("geometry closure and two-hop index", Some(Duration::from_secs(30)), geometry),
        ("rigid-motion invariance", Some(Duration::from_secs(60)), invariance),
        ("parameter gradients", Some(Duration::from_secs(60)), gradients),
        ("ablation ordering", Some(Duration::from_secs(15 * 60)), ablation),
        ("overfit sanity", Some(Duration::from_secs(5 * 60)), overfit),
        ("determinism", None, determinism),
        ("finite-difference force sum", Some(Duration::from_secs(5 * 60)), forces),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let mut out = run();
        let took = start.elapsed();
        if let Some(b) = budget {
            if took > b {
                out.pass = false;
                out.detail.push_str(&format!("; over the {}s budget", b.as_secs()));
            }
        }
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name} [{:.1}s]: {}", took.as_secs_f64(), out.detail);
        failed += usize::from(!out.pass);
    }
    if failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
