use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sailswarm::metrics::sample_metrics;
use sailswarm::stats::{wilcoxon_signed_rank, PairedSample};
use sailswarm::{run_sim, EnvKind, Vec2};
use sailswarm_bench::bench_config;

fn single_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_sim");
    group.sample_size(10);
    for env in [EnvKind::Steady10, EnvKind::Gusty10] {
        let config = bench_config(env, 60.0);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{env:?}")), &config, |b, cfg| {
            b.iter(|| run_sim(black_box(cfg), 1).unwrap())
        });
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let positions: Vec<Vec2> = (0..20)
        .map(|_| Vec2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)))
        .collect();
    let headings: Vec<f64> = (0..20).map(|_| rng.random_range(-3.0..3.0)).collect();
    c.bench_function("sample_metrics", |b| {
        b.iter(|| sample_metrics(0.0, black_box(&positions), black_box(&headings), 1.0, 35.0))
    });
}

fn wilcoxon(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [20usize, 200] {
        let sample = PairedSample::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        c.bench_function(&format!("wilcoxon_n{n}"), |b| b.iter(|| wilcoxon_signed_rank(black_box(&sample)).unwrap()));
    }
}

criterion_group!(benches, single_run, metrics, wilcoxon);
criterion_main!(benches);
