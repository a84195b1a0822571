use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smp_core::basis::BasisTables;
use smp_core::geometry::{compute_geometry, random_cluster};
use smp_core::network::{Gradients, Model};
use smp_core::train::{ablation_config, synthetic_dataset, train, SyntheticTask, TrainOptions};
use smp_core::{AblationMode, RunConfig};

fn basis(c: &mut Criterion) {
    let t = BasisTables::new(5.0, 6, 7).unwrap();
    let mut out = vec![0.0; t.tbf_len()];
    c.bench_function("tbf (6, 7)", |b| b.iter(|| t.tbf_into(black_box(2.3), black_box(1.1), black_box(4.0), &mut out)));
    let mut out = vec![0.0; t.sbf_len()];
    c.bench_function("sbf (6, 7)", |b| b.iter(|| t.sbf_into(black_box(2.3), black_box(1.1), &mut out)));
}

fn geometry(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = random_cluster(&mut rng, 20, 6.0, 0.9);
    c.bench_function("geometry 20 atoms", |b| b.iter(|| compute_geometry(black_box(&g), 5.0).unwrap()));
}

fn network(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_cluster(&mut rng, 12, 4.0, 0.9);
    let mut group = c.benchmark_group("network 12 atoms");
    group.sample_size(10);
    for mode in AblationMode::ALL {
        let model = Model::new(&RunConfig { ablation_mode: mode, ..RunConfig::default() }).unwrap();
        let params = model.init_params(0);
        let f = model.featurize(&g).unwrap();
        group.bench_function(format!("forward {mode}"), |b| b.iter(|| model.forward(&params, &f).unwrap().energy()));
        let mut grads = Gradients::zeros_like(&params);
        group.bench_function(format!("forward+backward {mode}"), |b| {
            b.iter(|| {
                let fwd = model.forward(&params, &f).unwrap();
                model.backward(&params, &fwd, 1.0, &mut grads);
            })
        });
    }
    group.finish();
}

fn training(c: &mut Criterion) {
    let data = synthetic_dataset(SyntheticTask::Torsion, 64, 0).unwrap();
    let model = Model::new(&ablation_config(AblationMode::Full, 0, 1)).unwrap();
    let mut group = c.benchmark_group("training");
    group.sample_size(10);
    group.bench_function("one epoch, 64 chains", |b| {
        b.iter(|| train(&model, &data, &[], &TrainOptions { threads: 1, max_steps: None }).unwrap().steps)
    });
    group.finish();
}

criterion_group!(benches, basis, geometry, network, training);
criterion_main!(benches);
