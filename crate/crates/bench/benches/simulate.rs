use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stickslip::{
    build_system, matrix_exponential, next_event, oracle_run, simulate, FrictionParams, Gains,
    Limits, OracleConfig, Relay, State,
};

fn example2(fc: f64) -> (Gains, FrictionParams) {
    (
        Gains::new(20.0, 100.0, 1000.0).unwrap(),
        FrictionParams::new(fc).unwrap(),
    )
}

fn engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    for fc in [50.0, 75.0, 100.0] {
        let (g, f) = example2(fc);
        let limits = Limits::default();
        group.bench_with_input(BenchmarkId::new("example2", fc), &fc, |b, _| {
            b.iter(|| {
                simulate(black_box(State::new(0.0, -1.1, 0.0)), g, f, &limits, 100.0).unwrap()
            })
        });
    }
    let (g, f) = example2(50.0);
    let long = Limits {
        t_max: 1e5,
        ..Limits::default()
    };
    group.bench_function("example5", |b| {
        b.iter(|| simulate(black_box(State::new(0.0, -0.5, 0.0)), g, f, &long, 1e-3).unwrap())
    });
    group.finish();
}

fn kernels(c: &mut Criterion) {
    let (g, f) = example2(75.0);
    let sys = build_system(g, f).unwrap();
    c.bench_function("matrix_exponential", |b| {
        b.iter(|| matrix_exponential(black_box(&sys.a), black_box(0.37)))
    });
    c.bench_function("next_event", |b| {
        b.iter(|| {
            next_event(
                black_box(&State::new(0.0, -1.1, 0.0)),
                Relay::Minus,
                &sys,
                10.0,
            )
        })
    });
    let cfg = OracleConfig::localized(1e-4, 75.0).unwrap();
    c.bench_function("oracle_run_1s", |b| {
        b.iter(|| oracle_run(black_box(State::new(0.0, -1.1, 0.0)), &sys, &cfg, 1.0, 100))
    });
}

criterion_group!(benches, engine, kernels);
criterion_main!(benches);
