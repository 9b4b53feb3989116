//! Behavioral transimpedance amplifier: `n` identical real poles with a
//! composite −3 dB corner, flat gain `10^(z21/20)` Ω and white
//! input-referred current noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::waveform::{Unit, Waveform};

use super::tunneling::EventTrace;

/// Minimum ratio of sample rate to TIA bandwidth.
pub const MIN_OVERSAMPLING: f64 = 10.0;
/// Samples required across one current pulse.
pub const MIN_SAMPLES_PER_PULSE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemperatureTag {
    #[serde(rename = "300K")]
    Room,
    #[serde(rename = "77K")]
    Cryo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiaModel {
    pub z21_db_ohm: f64,
    pub f3db: f64,
    pub n_poles: u32,
    /// Input-referred current noise density (A/√Hz).
    pub in_noise: f64,
    pub temperature_tag: TemperatureTag,
}

impl TiaModel {
    /// 108.5 dBΩ, 18 GHz, 0.89 pA/√Hz.
    pub fn room_temperature() -> Self {
        Self {
            z21_db_ohm: 108.5,
            f3db: 18e9,
            n_poles: 3,
            in_noise: 0.89e-12,
            temperature_tag: TemperatureTag::Room,
        }
    }

    /// 110.7 dBΩ, 25 GHz, 0.44 pA/√Hz.
    pub fn cryogenic() -> Self {
        Self {
            z21_db_ohm: 110.7,
            f3db: 25e9,
            n_poles: 3,
            in_noise: 0.44e-12,
            temperature_tag: TemperatureTag::Cryo,
        }
    }

    pub fn noiseless(self) -> Self {
        Self {
            in_noise: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z21_db_ohm > 0.0) {
            return Err(Error::config("z21 must be above 0 dBΩ"));
        }
        if !(self.f3db > 0.0) || self.n_poles == 0 {
            return Err(Error::config(
                "TIA needs a positive bandwidth and at least one pole",
            ));
        }
        if !(self.in_noise >= 0.0) {
            return Err(Error::config("input noise density must be non-negative"));
        }
        Ok(())
    }

    /// Mid-band transimpedance in ohms.
    pub fn z0(&self) -> f64 {
        10f64.powf(self.z21_db_ohm / 20.0)
    }

    /// Corner of each pole so the cascade is 3 dB down at `f3db`.
    pub fn pole_frequency(&self) -> f64 {
        let n = self.n_poles as f64;
        self.f3db / (2f64.powf(1.0 / n) - 1.0).sqrt()
    }

    /// |Z(f)| in ohms.
    pub fn magnitude(&self, f: f64) -> f64 {
        let x = f / self.pole_frequency();
        self.z0() / (1.0 + x * x).powf(self.n_poles as f64 / 2.0)
    }

    /// One-sided output noise density |Z(f)|²·i_n² (V²/Hz).
    pub fn output_noise_psd(&self, f: f64) -> f64 {
        let z = self.magnitude(f);
        z * z * self.in_noise * self.in_noise
    }

    /// Per-sample std of the discrete white input noise at `fs`.
    pub fn input_noise_std(&self, fs: f64) -> f64 {
        self.in_noise * (fs / 2.0).sqrt()
    }

    fn check_rate(&self, fs: f64) -> Result<()> {
        if !(fs >= MIN_OVERSAMPLING * self.f3db) {
            return Err(Error::precondition(format!(
                "TIA simulation needs fs >= {MIN_OVERSAMPLING}·f3db = {:.3e} Hz, got {fs:.3e} Hz",
                MIN_OVERSAMPLING * self.f3db
            )));
        }
        Ok(())
    }

    /// Coefficients `(k, a)` of one bilinear section
    /// `y[n] = k·(x[n] + x[n−1]) − a·y[n−1]`, prewarped so the cascade is
    /// exactly 3 dB down at `f3db`.
    fn section(&self, fs: f64) -> (f64, f64) {
        let warp = (PI * self.f3db / fs).tan() / (PI * self.f3db / fs);
        let omega = 2.0 * PI * self.pole_frequency() * warp;
        let c = 2.0 * fs;
        (omega / (omega + c), (omega - c) / (omega + c))
    }

    /// Discrete impulse response of the unit-gain filter at `fs`, truncated
    /// once the tail is negligible.
    pub fn impulse_response(&self, fs: f64) -> Vec<f64> {
        let mut h = Vec::new();
        let (k, a) = self.section(fs);
        let mut state = vec![(0.0f64, 0.0f64); self.n_poles as usize];
        let mut peak: f64 = 0.0;
        for n in 0.. {
            let mut v = if n == 0 { 1.0 } else { 0.0 };
            for (x_prev, y_prev) in state.iter_mut() {
                let y = k * (v + *x_prev) - a * *y_prev;
                *x_prev = v;
                *y_prev = y;
                v = y;
            }
            peak = peak.max(v.abs());
            h.push(v);
            if n > 16 && v.abs() < 1e-15 * peak {
                break;
            }
            if n > 10_000_000 {
                break;
            }
        }
        h
    }
}

/// Apply the filter cascade in place, starting from rest.
fn filter_in_place(samples: &mut [f64], m: &TiaModel, fs: f64) {
    let (k, a) = m.section(fs);
    for _ in 0..m.n_poles {
        let (mut x_prev, mut y_prev) = (0.0, 0.0);
        for s in samples.iter_mut() {
            let y = k * (*s + x_prev) - a * y_prev;
            x_prev = *s;
            y_prev = y;
            *s = y;
        }
    }
}

/// TIA output voltage for the input current `i`. `seed = None` runs noiseless.
pub fn tia_response(i: &Waveform, m: &TiaModel, seed: Option<u64>) -> Result<Waveform> {
    m.validate()?;
    if i.unit != Unit::Ampere {
        return Err(Error::UnitMismatch {
            expected: Unit::Ampere,
            found: i.unit,
        });
    }
    m.check_rate(i.fs)?;
    let mut x = i.samples.clone();
    if let (Some(seed), true) = (seed, m.in_noise > 0.0) {
        let sigma = m.input_noise_std(i.fs);
        let mut rng = rng_from_seed(seed);
        for v in x.iter_mut() {
            *v += sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
    filter_in_place(&mut x, m, i.fs);
    let z0 = m.z0();
    x.iter_mut().for_each(|v| *v *= z0);
    Waveform::new(x, i.fs, i.t0, Unit::Volt)
}

/// Rectangular current pulses of height `i_peak` and width `pulse_width`
/// at each event time, sampled over the trace window. Each sample carries
/// the pulse charge overlapping its cell, so the integral is exact.
pub fn events_to_current(
    trace: &EventTrace,
    i_peak: f64,
    pulse_width: f64,
    fs: f64,
) -> Result<Waveform> {
    if !(fs > 0.0 && pulse_width > 0.0) {
        return Err(Error::domain(
            "sample rate and pulse width must be positive",
        ));
    }
    if pulse_width * fs < MIN_SAMPLES_PER_PULSE {
        return Err(Error::precondition(format!(
            "pulse width {pulse_width:.3e} s spans fewer than {MIN_SAMPLES_PER_PULSE} samples at {fs:.3e} Hz"
        )));
    }
    if !(10e-12..=10e-9).contains(&i_peak.abs()) {
        log::warn!("peak current {i_peak:.3e} A lies outside the 10 pA to 10 nA range");
    }
    let n = ((trace.window * fs).round() as usize).max(1);
    let mut samples = vec![0.0; n];
    let dt = 1.0 / fs;
    for e in &trace.events {
        let (start, end) = (e.time, e.time + pulse_width);
        let first = (start * fs).floor().max(0.0) as usize;
        let last = ((end * fs).ceil() as usize).min(n);
        for (k, s) in samples.iter_mut().enumerate().take(last).skip(first) {
            let lo = (k as f64 * dt).max(start);
            let hi = ((k + 1) as f64 * dt).min(end);
            if hi > lo {
                *s += i_peak * (hi - lo) * fs;
            }
        }
    }
    Waveform::new(samples, fs, 0.0, Unit::Ampere)
}
