use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shapley_r2::asymptotics::AsymptoticModel;
use shapley_r2::simlab::{compound_symmetry_sigma, sample_mvnormal};
use shapley_r2::{
    bootstrap_ci, confidence_intervals, sample_correlation, shapley_subset_form, BootstrapConfig,
    CorrelationModel,
};

fn model(d: usize) -> CorrelationModel {
    let sigma = compound_symmetry_sigma(d, 0.3).unwrap();
    sample_correlation(&sample_mvnormal(&sigma, 500, 1).unwrap()).unwrap()
}

fn subset_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("shapley_subset_form");
    for d in [3, 6, 10] {
        let m = model(d);
        group.bench_with_input(BenchmarkId::from_parameter(d), &m, |b, m| {
            // A fresh model each time so the determinant cache starts cold.
            b.iter(|| shapley_subset_form(&CorrelationModel::new(m.matrix().clone()).unwrap()))
        });
    }
    group.finish();
}

fn shapley_acov(c: &mut Criterion) {
    let mut group = c.benchmark_group("shapley_acov");
    group.sample_size(20);
    for d in [3, 5, 7] {
        let m = model(d);
        group.bench_with_input(BenchmarkId::from_parameter(d), &m, |b, m| {
            b.iter(|| {
                AsymptoticModel::new(black_box(m.clone()), 1.0)
                    .unwrap()
                    .shapley_acov()
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn intervals(c: &mut Criterion) {
    let sigma = compound_symmetry_sigma(3, 0.3).unwrap();
    let mut group = c.benchmark_group("intervals");
    group.sample_size(10);
    for n in [1_000, 10_000] {
        let data = sample_mvnormal(&sigma, n, 2).unwrap();
        group.bench_with_input(BenchmarkId::new("asymptotic", n), &data, |b, data| {
            b.iter(|| confidence_intervals(black_box(data), 0.05).unwrap())
        });
        let cfg = BootstrapConfig {
            n_resamples: 200,
            alpha: 0.05,
            seed: 3,
        };
        group.bench_with_input(BenchmarkId::new("bootstrap_ci", n), &data, |b, data| {
            b.iter(|| bootstrap_ci(black_box(data), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, subset_form, shapley_acov, intervals);
criterion_main!(benches);
