use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use settle_core::jitter::IsiTraceModel;
use settle_core::par::Execution;
use settle_core::sim::{run_monte_carlo, InitialPosition, Trial, TrialConfig};

fn monte_carlo(c: &mut Criterion) {
    let trial = Trial::new(TrialConfig::discrete(
        IsiTraceModel::one_bit(0.0, 40.0).unwrap(),
        10_000_000,
    ))
    .unwrap();
    let positions = [InitialPosition::Steps(20.0)];
    let mut group = c.benchmark_group("isi1_window40_center");
    group.sample_size(10);
    for trials in [1_000u64, 10_000] {
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(name, trials), &trials, |b, &n| {
                b.iter(|| run_monte_carlo(&trial, n, black_box(&positions), 1, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, monte_carlo);
criterion_main!(benches);
