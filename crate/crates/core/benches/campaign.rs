use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use uavsense::exec::Exec;
use uavsense::experiments::{Preset, SimConfig, TrialSetup};
use uavsense::geometry::GridKind;

fn small_desk() -> SimConfig {
    let mut cfg = SimConfig::preset(Preset::Desk);
    cfg.scene.divisions = 8;
    cfg
}

fn setup(c: &mut Criterion) {
    let cfg = small_desk();
    let mut group = c.benchmark_group("deployment");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| TrialSetup::new(&cfg, GridKind::Mixed, exec).unwrap())
        });
    }
    group.finish();
}

fn trials(c: &mut Criterion) {
    let cfg = small_desk();
    let setup = TrialSetup::new(&cfg, GridKind::Mixed, Exec::Parallel).unwrap();
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_function(BenchmarkId::new(name, 16), |b| {
            b.iter(|| setup.run_trials(16, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, setup, trials);
criterion_main!(benches);
