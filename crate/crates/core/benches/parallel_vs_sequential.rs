//! Compares the rayon-parallel trial runner against the sequential fallback
//! on the same job batch, plus micro-benchmarks of the inner solvers.
//!
//! With the default `parallel` feature, `run_trials` distributes jobs over
//! the global rayon pool while `run_trials_sequential` is the single-thread
//! baseline; without the feature both run the same sequential loop.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use semiview::eval::{run_trials, run_trials_sequential, PairedDataset, SplitPlan, TestedView, TrialJob};
use semiview::matkernels::SymMatrix;
use semiview::models::{ModelFamily, ModelSpec};
use semiview::saa::{saa_solve, JointProblem, SaaOptions};
use semiview::trs::{solve_trs_dense, TrsProblem};

fn synthetic_dataset(n_per_class: usize, classes: usize) -> PairedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBE7C);
    let n = n_per_class * classes;
    let (d1, d2) = (24, 18);
    let view1 = DMatrix::from_fn(d1, n, |r, c| {
        let class = (c / n_per_class) as f64;
        let center = if r < 3 { 4.0 * class } else { 0.0 };
        center + rng.random::<f64>() - 0.5
    });
    let view2 = DMatrix::from_fn(d2, n, |r, c| {
        let class = (c / n_per_class) as f64;
        let center = if r < 2 { -3.0 * class } else { 0.0 };
        center + rng.random::<f64>() - 0.5
    });
    let labels: Vec<usize> = (0..n).map(|c| c / n_per_class).collect();
    PairedDataset::new(view1, view2, labels).unwrap()
}

fn trial_jobs(seeds: u64) -> Vec<TrialJob> {
    let mut spec = ModelSpec::new(ModelFamily::USemiCca);
    spec.gamma = 0.9;
    spec.k = 2;
    (0..seeds)
        .map(|seed| TrialJob {
            plan: SplitPlan::new(seed),
            spec: spec.clone(),
            tested_view: TestedView::Concat,
        })
        .collect()
}

fn bench_trial_batch(c: &mut Criterion) {
    let dataset = synthetic_dataset(60, 4);
    let jobs = trial_jobs(16);
    let opts = SaaOptions::default();

    let mut group = c.benchmark_group("trial_batch_16");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let out = run_trials_sequential(black_box(&dataset), black_box(&jobs), &opts);
            black_box(out)
        })
    });
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let out = run_trials(black_box(&dataset), black_box(&jobs), &opts);
            black_box(out)
        })
    });
    group.finish();
}

fn bench_inner_solvers(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x50BE);
    let d = 64;
    let m = DMatrix::from_fn(d, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let a = SymMatrix::from_dense(&m).unwrap();
    let b = DVector::from_fn(d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let p = TrsProblem::new(a, b).unwrap();
    c.bench_function("trs_dense_64", |bch| {
        bch.iter(|| black_box(solve_trs_dense(black_box(&p)).unwrap()))
    });

    let gen = DMatrix::from_fn(20, 20, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let b1 = SymMatrix::from_dense(&(&gen * gen.transpose() + DMatrix::identity(20, 20))).unwrap();
    let gen = DMatrix::from_fn(16, 16, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let b2 = SymMatrix::from_dense(&(&gen * gen.transpose() + DMatrix::identity(16, 16))).unwrap();
    let jp = JointProblem::new(
        SymMatrix::zeros(20),
        SymMatrix::zeros(16),
        DMatrix::from_fn(20, 16, |_, _| rng.random::<f64>() * 2.0 - 1.0),
        b1,
        b2,
    )
    .unwrap();
    c.bench_function("saa_solve_20x16_k3", |bch| {
        bch.iter(|| black_box(saa_solve(black_box(&jp), 3, &SaaOptions::default()).unwrap()))
    });
}

criterion_group!(benches, bench_trial_batch, bench_inner_solvers);
criterion_main!(benches);
