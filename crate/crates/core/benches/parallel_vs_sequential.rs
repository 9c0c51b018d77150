use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dgbo_core::identities::{refinement_study, Identity};
use dgbo_core::par::Execution;
use dgbo_core::stein::stein_table;
use dgbo_core::DispersionParams;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn stein(c: &mut Criterion) {
    let mut g = c.benchmark_group("stein_table_3x3");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| stein_table(&[0.1, 0.5, 0.9], exec).unwrap())
        });
    }
    g.finish();
}

fn refinement(c: &mut Criterion) {
    let p = DispersionParams::with_a(0.5).unwrap();
    let ns = [256, 512, 1024, 2048, 4096];
    let mut g = c.benchmark_group("weight1_refinement");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| refinement_study(Identity::Weight1, |x| (-x * x).exp(), 60.0, &ns, p, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, stein, refinement);
criterion_main!(benches);
