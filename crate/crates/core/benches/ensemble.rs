use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entrysim::{run, run_ensemble, DispersionSpec, Execution, Scenario};

fn single_run(c: &mut Criterion) {
    let s = Scenario::default();
    c.bench_function("nominal_run", |b| {
        b.iter(|| run(black_box(&s)).unwrap().report)
    });
}

fn ensemble(c: &mut Criterion) {
    let nominal = Scenario::default();
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for n in [16usize, 64] {
        let spec = DispersionSpec {
            n_runs: n,
            ..Default::default()
        };
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(name, n), &spec, |b, spec| {
                b.iter(|| run_ensemble(black_box(spec), &nominal, exec).unwrap().stats)
            });
        }
    }
    group.finish();
}

criterion_group!(benches, single_run, ensemble);
criterion_main!(benches);
