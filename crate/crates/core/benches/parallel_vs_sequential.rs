use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use legendre_flow::{
    inequality::standard_inequalities, run_batch, run_ensemble_with, Constraint, CurveEnsembleSpec, Execution,
    FlowConfig, FlowType, SupportFourier,
};

fn ensemble(c: &mut Criterion) {
    let spec = CurveEnsembleSpec::new(42, 1000, 8, 1.5, Constraint::None);
    let ineqs = standard_inequalities(&[0.0, 4.0, 8.0], &[0.0, 12.0, 24.0]);
    let mut group = c.benchmark_group("ensemble_1000");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| run_ensemble_with(&spec, &ineqs, exec).unwrap())
        });
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let configs: Vec<_> = (0..32)
        .map(|i| {
            let p = SupportFourier::constant(2.0 + 0.05 * i as f64).with_mode(2, 0.0, 1.0).with_mode(3, 0.2, -0.1);
            FlowConfig::new(FlowType::AreaPreserving, p).t_final(2.0).dt(1e-3).record_every(10)
        })
        .collect();
    let mut group = c.benchmark_group("flow_batch_32");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| run_batch(&configs, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, ensemble, batch);
criterion_main!(benches);
