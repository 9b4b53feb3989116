use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spinsim_core::config::BUNDLED_FIG3;
use spinsim_core::dynamics::{propagator_rwa, rwa_gate_infidelity_at, RotatingFramePulse};
use spinsim_core::readout::{charge_state, tia_response, DqdConfig, TiaModel};
use spinsim_core::{parse_sequence, Unit, Waveform};

fn propagators(c: &mut Criterion) {
    let p = RotatingFramePulse {
        f_r: 750e6,
        detuning: 2e6,
        phase: 0.3,
        duration: 333e-12,
    };
    c.bench_function("propagator_rwa", |b| {
        b.iter(|| propagator_rwa(black_box(&p)).unwrap())
    });
    c.bench_function("lab_frame_gate_ratio_5", |b| {
        b.iter(|| rwa_gate_infidelity_at(black_box(5.0), 0.0, 2000).unwrap())
    });
}

fn tia(c: &mut Criterion) {
    let fs = 200e9;
    let samples: Vec<f64> = (0..20_000)
        .map(|k| if (k / 500) % 2 == 1 { 5e-9 } else { 0.0 })
        .collect();
    let i = Waveform::new(samples, fs, 0.0, Unit::Ampere).unwrap();
    let m = TiaModel::room_temperature();
    c.bench_function("tia_response_20k_noisy", |b| {
        b.iter(|| tia_response(black_box(&i), &m, Some(1)).unwrap())
    });
}

fn dqd(c: &mut Criterion) {
    let cfg = DqdConfig::reference();
    c.bench_function("charge_state", |b| {
        b.iter(|| charge_state(black_box(0.021), black_box(0.037), &cfg))
    });
}

fn parser(c: &mut Criterion) {
    c.bench_function("parse_fig3", |b| {
        b.iter(|| parse_sequence(black_box(BUNDLED_FIG3)).unwrap())
    });
}

criterion_group!(benches, propagators, tia, dqd, parser);
criterion_main!(benches);
