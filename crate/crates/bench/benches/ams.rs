use std::hint::black_box;

use ams_core::analysis::{characteristic_roots, solve_chi};
use ams_core::{run_ams, AmsParams, DistributionModel, RngStream};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_run_ams(c: &mut Criterion) {
    let dist = DistributionModel::Exponential { rate: 1.0 };
    let mut group = c.benchmark_group("run_ams");
    group.sample_size(20);
    for (n, k) in [(100, 1), (1_000, 10), (10_000, 10), (10_000, 100)] {
        let mut index = 0;
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}_k{k}")), &(n, k), |b, &(n, k)| {
            b.iter(|| {
                index += 1;
                let params = AmsParams::new(n, k, 6.0).with_seed(RngStream::new(7, index));
                black_box(run_ams(&params, &dist).unwrap().estimate)
            })
        });
    }
    group.finish();
}

fn bench_analysis(c: &mut Criterion) {
    let mut group = c.benchmark_group("analysis");
    for (n, k) in [(64, 5), (1_000_000, 3)] {
        group.bench_function(format!("roots_n{n}_k{k}"), |b| {
            b.iter(|| characteristic_roots(black_box(n), k, 1.0).unwrap())
        });
    }
    group.bench_function("solve_chi_n64_k5", |b| b.iter(|| solve_chi(black_box(64), 5, 1.0, 2.0).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_run_ams, bench_analysis);
criterion_main!(benches);
