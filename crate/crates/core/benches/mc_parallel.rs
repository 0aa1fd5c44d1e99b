use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ris_secrecy::mc::{estimate_metric_with, Execution};
use ris_secrecy::validate::standard_params;
use ris_secrecy::{MetricKind, PhaseDesign, SecrecyThreshold};

fn sop_estimate(c: &mut Criterion) {
    let thr = SecrecyThreshold::new(0.8).unwrap();
    let design = PhaseDesign::CoherentImperfect;
    let mut group = c.benchmark_group("mc_sop_L16");
    group.sample_size(10);
    for n in [20_000u64, 100_000] {
        let p = standard_params(16, 20.0, -20.0).unwrap();
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| {
                    estimate_metric_with(MetricKind::Sop, design, &p, &thr, n, 42, exec).unwrap()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sop_estimate);
criterion_main!(benches);
