use balance_bench::{correlated, heterogeneous, hypergraph};
use balance_core::objective::{estimate_batch, exact_value};
use balance_core::{
    estimate, solve_correlated, solve_heterogeneous, transform_tau, EstimatorConfig, ObjectiveId, Sampling,
    SolutionProfile, SolverOptions,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimate");
    let s = SolutionProfile::parse("0:1,1:2").unwrap();
    for n in [20u32, 80] {
        let inst = heterogeneous(n, 40);
        let cfg = EstimatorConfig::new(0.1, 0.1, 1).with_cap(Some(2_000)).with_sampling(Sampling::Forward);
        g.bench_with_input(BenchmarkId::new("forward", n), &inst, |b, inst| {
            b.iter(|| estimate(ObjectiveId::Phi, black_box(&s), inst, &cfg).unwrap())
        });
    }
    let small = heterogeneous(12, 12);
    for mode in [Sampling::Forward, Sampling::Grouped] {
        let cfg = EstimatorConfig::new(0.1, 0.1, 1).with_cap(Some(20_000)).with_sampling(mode);
        g.bench_function(BenchmarkId::new("12 slots", format!("{mode:?}")), |b| {
            b.iter(|| estimate(ObjectiveId::Phi, black_box(&s), &small, &cfg).unwrap())
        });
    }
    g.bench_function("exact 12 slots", |b| b.iter(|| exact_value(ObjectiveId::Phi, black_box(&s), &small).unwrap()));
    g.finish();
}

fn candidates(c: &mut Criterion) {
    let inst = heterogeneous(60, 30);
    let cand: Vec<Vec<_>> = inst.pairs().into_iter().map(|p| vec![p]).collect();
    let cfg = EstimatorConfig::new(0.1, 0.1, 1).with_cap(Some(500)).with_sampling(Sampling::Forward);
    let base = inst.seeds();
    c.bench_function("batch of all singleton extensions, n=60", |b| {
        b.iter(|| estimate_batch(ObjectiveId::PhiGeq(1), &base, &SolutionProfile::new(), black_box(&cand), &inst, &cfg).unwrap())
    });
}

fn solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    let opts = SolverOptions::new(0.2, 0.1, 3).with_cap(Some(300));
    let het = heterogeneous(25, 20);
    g.bench_function("het n=25", |b| b.iter(|| solve_heterogeneous(black_box(&het), &opts).unwrap()));
    let cor = correlated(25, 20);
    g.bench_function("cor n=25", |b| b.iter(|| solve_correlated(black_box(&cor), &opts).unwrap()));
    g.finish();
}

fn reduction(c: &mut Criterion) {
    let h = hypergraph(12, 3, 20);
    c.bench_function("transform d=3 |E|=20", |b| b.iter(|| transform_tau(black_box(&h), 4, 4, 4).unwrap()));
}

criterion_group!(benches, sampling, candidates, solvers, reduction);
criterion_main!(benches);
