use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use tmsc_core::detector::analyze;
use tmsc_core::signal::extract_window;
use tmsc_core::sim::{gen_pseudo_fuds, make_scenario, Scenario};
use tmsc_core::spectral::{build_scale_grid, cwt};
use tmsc_core::{DetectorConfig, MorletParams, WindowSpec};

fn bench_cwt(c: &mut Criterion) {
    let params = MorletParams::default();
    let grid = build_scale_grid(0.0024, 0.5, 12, &params).unwrap();
    let out = make_scenario(Scenario::All, 0).unwrap();
    let window = extract_window(&out.voltage, &WindowSpec::new(0.0, 1370.0).unwrap()).unwrap();
    c.bench_function("cwt 1370x93", |b| {
        b.iter(|| cwt(black_box(&window), &grid, &params).unwrap())
    });
}

fn bench_analyze(c: &mut Criterion) {
    let out = make_scenario(Scenario::All, 0).unwrap();
    let cfg = DetectorConfig {
        window: WindowSpec::new(0.0, 1370.0).unwrap(),
        ..DetectorConfig::default()
    };
    c.bench_function("analyze 1370-sample window", |b| {
        b.iter(|| analyze(black_box(&out.voltage), black_box(&out.current), &cfg).unwrap())
    });
}

fn bench_simulate(c: &mut Criterion) {
    c.bench_function("simulate scenario (2740 samples)", |b| {
        b.iter(|| make_scenario(Scenario::All, black_box(0)).unwrap())
    });
    c.bench_function("gen_pseudo_fuds 2740 s", |b| {
        b.iter(|| gen_pseudo_fuds(2740.0, 1.0, black_box(0)).unwrap())
    });
}

criterion_group!(benches, bench_cwt, bench_analyze, bench_simulate);
criterion_main!(benches);
