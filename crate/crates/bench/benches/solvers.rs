use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use robust_rcpsp::network::minimal_forbidden_sets;
use robust_rcpsp::{
    build_compact, random_instance, solve_exact, warm_start, worst_case_makespan_dp, CompactOptions, GeneratorConfig,
    SearchLimits, Selection,
};

fn family(jobs: usize, resources: usize) -> GeneratorConfig {
    GeneratorConfig {
        jobs,
        resources,
        robustify: true,
        ..Default::default()
    }
}

fn adversary(c: &mut Criterion) {
    let mut group = c.benchmark_group("dp");
    for jobs in [8, 30] {
        let inst = random_instance(&family(jobs, 1), 11);
        for gamma in [1, 5] {
            group.bench_with_input(BenchmarkId::new(format!("n{jobs}"), gamma), &gamma, |b, &g| {
                b.iter(|| worst_case_makespan_dp(&inst, &Selection::empty(), black_box(g)).unwrap())
            });
        }
    }
    group.finish();
}

fn heuristics(c: &mut Criterion) {
    let inst = random_instance(&family(30, 2), 3);
    c.bench_function("warm_start/n30", |b| b.iter(|| warm_start(&inst, black_box(3))));
    c.bench_function("forbidden_sets/n30", |b| {
        b.iter(|| minimal_forbidden_sets(black_box(&inst)).unwrap())
    });
    c.bench_function("build_compact/n30", |b| {
        let opts = CompactOptions {
            transitivity: true,
            ..Default::default()
        };
        b.iter(|| build_compact(&inst, 3, &opts).unwrap())
    });
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("bnb");
    group.sample_size(10);
    for jobs in [6, 8] {
        let inst = random_instance(&family(jobs, 2), 5);
        group.bench_function(BenchmarkId::from_parameter(jobs), |b| {
            b.iter(|| solve_exact(&inst, 2, SearchLimits::default(), None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, adversary, heuristics, exact);
criterion_main!(benches);
