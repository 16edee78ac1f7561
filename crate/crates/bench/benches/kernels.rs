use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bellnet_bench::{star_dense, star_family};
use bellnet_core::classical::{classical_max, MixtureOptions, Mode};
use bellnet_core::quantum::{dense_expectation, quantum_sum_family, quantum_value, sweep_family};

fn stabilizer_expectation(c: &mut Criterion) {
    let mut group = c.benchmark_group("stabilizer_expectation");
    for n in [2, 4, 6] {
        let fam = star_family(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &fam, |b, fam| {
            b.iter(|| {
                fam.operators
                    .iter()
                    .map(|op| quantum_value(op, &fam.state).unwrap())
                    .sum::<f64>()
            })
        });
    }
    group.finish();
}

fn dense_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("dense_expectation");
    for n in [2, 4, 6] {
        let fam = star_family(n);
        let dense = star_dense(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &(fam, dense), |b, (fam, dense)| {
            b.iter(|| {
                fam.operators
                    .iter()
                    .map(|op| dense_expectation(op, dense).unwrap())
                    .sum::<f64>()
            })
        });
    }
    group.finish();
}

fn classical_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("classical_max");
    group.sample_size(10);
    for n in [2, 3] {
        let fam = star_family(n);
        group.bench_with_input(BenchmarkId::new("linear", n), &fam, |b, fam| {
            b.iter(|| classical_max(fam, 1.0, Mode::Deterministic, MixtureOptions::default()).unwrap())
        });
        let opts = MixtureOptions {
            restarts: 50,
            ..MixtureOptions::default()
        };
        group.bench_with_input(BenchmarkId::new("mixture", n), &fam, |b, fam| {
            b.iter(|| classical_max(fam, 0.5, Mode::Mixture, opts).unwrap())
        });
    }
    group.finish();
}

fn quantum_kernels(c: &mut Criterion) {
    let fam = star_family(3);
    c.bench_function("quantum_sum/3", |b| b.iter(|| quantum_sum_family(black_box(&fam), 0.5).unwrap()));
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for grid in [11, 31] {
        group.bench_with_input(BenchmarkId::from_parameter(grid), &grid, |b, &grid| {
            b.iter(|| sweep_family(&fam, 1.0, grid).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, stabilizer_expectation, dense_oracle, classical_search, quantum_kernels);
criterion_main!(benches);
