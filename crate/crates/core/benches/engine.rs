//! Throughput comparison of the rayon path loop against the sequential
//! fallback, for both the two-dimensional engine and the reflected
//! one-dimensional engine. The two lanes produce bit-identical estimates;
//! the question benchmarked here is only how well the paths scale.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ruin_core::model::{ModelParams, Policy};
use ruin_core::simulator::{
    estimate_ruin, estimate_ruin_reflected, estimate_ruin_reflected_serial, estimate_ruin_serial,
    SimConfig,
};
use std::hint::black_box;

fn bench_estimate_ruin(c: &mut Criterion) {
    let params = ModelParams::base(0.5, 0.5, 0.0, 0.0);
    let mut group = c.benchmark_group("estimate_ruin");
    group.sample_size(10);
    for &n_paths in &[500u64, 2000] {
        let mut config = SimConfig::new(1e-3, 10.0, n_paths, 42);
        config.bridge_correction = true;
        group.bench_with_input(
            BenchmarkId::new("parallel", n_paths),
            &config,
            |b, config| {
                b.iter(|| {
                    estimate_ruin(
                        black_box(1.0),
                        black_box(1.0),
                        &Policy::PushBottom,
                        &params,
                        config,
                    )
                    .unwrap()
                })
            },
        );
        group.bench_with_input(BenchmarkId::new("serial", n_paths), &config, |b, config| {
            b.iter(|| {
                estimate_ruin_serial(
                    black_box(1.0),
                    black_box(1.0),
                    &Policy::PushBottom,
                    &params,
                    config,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_reflected(c: &mut Criterion) {
    let params = ModelParams::extended(1.0, 1.0, 1.0, -1.0, 0.0);
    let mut group = c.benchmark_group("estimate_ruin_reflected");
    group.sample_size(10);
    let mut config = SimConfig::new(1e-3, 10.0, 2000, 42);
    config.bridge_correction = true;
    group.bench_function("parallel", |b| {
        b.iter(|| {
            estimate_ruin_reflected(black_box(2.0), black_box(2.0), &params, &config).unwrap()
        })
    });
    group.bench_function("serial", |b| {
        b.iter(|| {
            estimate_ruin_reflected_serial(black_box(2.0), black_box(2.0), &params, &config)
                .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_estimate_ruin, bench_reflected);
criterion_main!(benches);
