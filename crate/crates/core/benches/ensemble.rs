use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use smcmc_core::mixture::{simulate_data, MixtureHyper, MixtureInit, MixtureModel, MixtureParams};
use smcmc_core::{run_stream, EngineOptions, ExecPolicy, ScheduleConfig, StopRule};

fn mixture_stream(c: &mut Criterion) {
    let data = simulate_data(&MixtureParams::benchmark_truth(), 40, 7).unwrap();
    let sched = ScheduleConfig::default();
    let mut group = c.benchmark_group("mixture_stream");
    group.sample_size(10);
    for policy in [ExecPolicy::Sequential, ExecPolicy::Parallel] {
        let opts = EngineOptions {
            policy,
            stop: StopRule::Fixed(20),
            check_jump_locality: false,
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{policy:?}")),
            &opts,
            |b, opts| {
                b.iter(|| {
                    let mut model = MixtureModel::new(
                        MixtureHyper::default(),
                        MixtureInit::centered(vec![-3.0, 0.0, 3.0, 6.0]),
                    )
                    .unwrap();
                    run_stream(data.iter().copied(), &mut model, &sched, 128, 1, opts).unwrap()
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, mixture_stream);
criterion_main!(benches);
