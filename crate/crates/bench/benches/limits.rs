//! Benchmarks for the hot paths: the continuous sweep, the discrete finite
//! search, the Nyquist locus scan, certificate search, and loop simulation.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use phaselim::analysis::{find_violation, AnalysisConfig};
use phaselim::ct_limits::{rho_c, CtLimitParams, SweepConfig};
use phaselim::dt_limits::{rho_d, DtInterval};
use phaselim::lti::{nyquist_value, TransferFunction};
use phaselim::lure::{simulate, PiecewiseLinearNonlinearity, SimConfig, Signal};
use phaselim::NonlinearityClass;

fn example_plant() -> TransferFunction {
    TransferFunction::discrete(vec![1.0, 0.0], vec![1.0, -1.8, 0.81]).unwrap()
}

fn bench_rho_ct(c: &mut Criterion) {
    let p = CtLimitParams::new(1.6, 2.25, 3.36, 4.725, 1.0).unwrap();
    let cfg = SweepConfig::default();
    let mut g = c.benchmark_group("continuous");
    g.sample_size(10);
    g.bench_function("rho_c_sweep", |b| {
        b.iter(|| rho_c(black_box(&p), &cfg).unwrap().rho)
    });
    g.finish();
}

fn bench_rho_dt(c: &mut Criterion) {
    let iv = DtInterval::new(0.7, 0.77501).unwrap();
    c.bench_function("rho_d_finite_search", |b| {
        b.iter(|| rho_d(black_box(&iv)).unwrap().rho)
    });
}

fn bench_nyquist(c: &mut Criterion) {
    let tf = example_plant();
    c.bench_function("nyquist_value_10001", |b| {
        b.iter(|| nyquist_value(black_box(&tf), 10_001).unwrap())
    });
}

fn bench_violation(c: &mut Criterion) {
    let tf = example_plant();
    let cfg = AnalysisConfig::default();
    let mut g = c.benchmark_group("certificates");
    g.sample_size(20);
    g.bench_function("find_violation_k1.5", |b| {
        b.iter(|| {
            find_violation(black_box(&tf), 1.5, NonlinearityClass::NonOdd, &cfg)
                .unwrap()
                .is_some()
        })
    });
    g.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let tf = example_plant();
    let sat = PiecewiseLinearNonlinearity::saturation(2.1, 2.1).unwrap();
    let kick = Signal::Impulse { amplitude: 8.0 };
    let cfg = SimConfig::new(2400.0, 1.0).unwrap();
    c.bench_function("simulate_discrete_2400", |b| {
        b.iter(|| {
            simulate(black_box(&tf), &sat, &Signal::Zero, &kick, &cfg)
                .unwrap()
                .periodic
        })
    });
}

criterion_group!(
    benches,
    bench_rho_ct,
    bench_rho_dt,
    bench_nyquist,
    bench_violation,
    bench_simulate
);
criterion_main!(benches);
