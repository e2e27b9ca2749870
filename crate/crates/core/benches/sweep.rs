use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use discop::bench::{run_sweep, SweepSpec};
use discop::Execution;

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(10));
    for (label, n, d) in [("n6d3", 6, 3), ("n8d4", 8, 4)] {
        let mut spec = SweepSpec::new(n, d, 0.7, vec![0.5, 0.8, 0.9], 4);
        for execution in [Execution::Sequential, Execution::Parallel] {
            spec.execution = execution;
            let name = match execution {
                Execution::Sequential => "sequential",
                Execution::Parallel => "parallel",
            };
            group.bench_with_input(BenchmarkId::new(name, label), &spec, |b, spec| {
                b.iter(|| black_box(run_sweep(spec).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
