use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ksmin_core::bounds::{continuous_probe_with, max_branch_bound_with, max_exhaustive_with};
use ksmin_core::exec::Execution;
use ksmin_core::graphs::{base_graph_9, line_graph};
use ksmin_core::quadform::{build_L3, build_L4, build_Ld};
use ksmin_core::ray_sets::build_13ray;
use ksmin_core::realize::realize_seeds;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn exhaustive(c: &mut Criterion) {
    let mut group = c.benchmark_group("exhaustive");
    let forms = [build_L3(&build_13ray()).unwrap(), build_L4(), build_Ld(6).unwrap()];
    for f in &forms {
        if f.len() > 20 {
            group.sample_size(10);
        }
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(f.name(), mode), &exec, |b, &exec| {
                b.iter(|| max_exhaustive_with(f, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn branch_bound(c: &mut Criterion) {
    let mut group = c.benchmark_group("branch_bound");
    for d in [7, 12] {
        let f = build_Ld(d).unwrap();
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(f.name(), mode), &exec, |b, &exec| {
                b.iter(|| max_branch_bound_with(&f, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn probe(c: &mut Criterion) {
    let mut group = c.benchmark_group("probe");
    let f = build_Ld(9).unwrap();
    for (mode, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("L9 x 2000", mode), &exec, |b, &exec| {
            b.iter(|| continuous_probe_with(&f, 2000, 0, exec).unwrap())
        });
    }
    group.finish();
}

fn realize(c: &mut Criterion) {
    let mut group = c.benchmark_group("realize");
    group.sample_size(10);
    let g = line_graph(&base_graph_9());
    for (mode, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("18 rays x 16 seeds", mode), &exec, |b, &exec| {
            b.iter(|| realize_seeds(&g, 4, 0, 16, 20_000, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, exhaustive, branch_bound, probe, realize);
criterion_main!(benches);
