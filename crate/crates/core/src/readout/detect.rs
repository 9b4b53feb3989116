//! Threshold detection of TIA output pulses and readout error sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::waveform::{Unit, Waveform};

use super::tia::{tia_response, TiaModel, MIN_OVERSAMPLING};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub decision: bool,
    /// Boxcar mean of the output over the window (V).
    pub mean: f64,
    /// Model noise std of that boxcar mean (V).
    pub noise_std: f64,
    /// `mean / noise_std`; infinite for a noiseless model.
    pub snr: f64,
}

/// Std of the boxcar mean of `window_samples` consecutive output samples
/// for stationary input noise, from the discrete impulse response.
pub fn boxcar_noise_std(m: &TiaModel, fs: f64, window_samples: usize) -> f64 {
    if m.in_noise == 0.0 || window_samples == 0 {
        return 0.0;
    }
    let h = m.impulse_response(fs);
    let mut prefix = Vec::with_capacity(h.len() + 1);
    prefix.push(0.0);
    for v in &h {
        prefix.push(prefix.last().unwrap() + v);
    }
    let total = *prefix.last().unwrap();
    let p = |j: isize| -> f64 {
        if j < 0 {
            0.0
        } else {
            prefix.get(j as usize + 1).copied().unwrap_or(total)
        }
    };
    let n = window_samples as isize;
    let mut energy = 0.0;
    for j in 0..(h.len() as isize + n) {
        let g = (p(j) - p(j - n)) / n as f64;
        energy += g * g;
    }
    m.z0() * m.input_noise_std(fs) * energy.sqrt()
}

/// Expected SNR of a settled `i_peak` plateau averaged over `window` seconds.
pub fn expected_snr(i_peak: f64, window: f64, m: &TiaModel, fs: f64) -> f64 {
    let n = ((window * fs).round() as usize).max(1);
    let sigma = boxcar_noise_std(m, fs, n);
    if sigma == 0.0 {
        f64::INFINITY
    } else {
        m.z0() * i_peak / sigma
    }
}

/// Boxcar-integrate `v` over `[start, start + window)` and compare with `threshold`.
pub fn detect(
    v: &Waveform,
    start: f64,
    window: f64,
    threshold: f64,
    m: &TiaModel,
) -> Result<Detection> {
    if v.unit != Unit::Volt {
        return Err(Error::UnitMismatch {
            expected: Unit::Volt,
            found: v.unit,
        });
    }
    if !(window > 0.0) || start < v.t0 || start + window > v.t_end() + 0.5 / v.fs {
        return Err(Error::precondition(
            "detection window lies outside the waveform support",
        ));
    }
    let range = v.index_range(start, window);
    if range.is_empty() {
        return Err(Error::precondition("detection window holds no samples"));
    }
    let n = range.len();
    let mean = v.samples[range].iter().sum::<f64>() / n as f64;
    let noise_std = boxcar_noise_std(m, v.fs, n);
    let snr = if noise_std == 0.0 {
        f64::INFINITY.copysign(mean)
    } else {
        mean / noise_std
    };
    Ok(Detection {
        decision: mean > threshold,
        mean,
        noise_std,
        snr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub i_peak: f64,
    pub window: f64,
    pub error_rate: f64,
    pub snr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    /// Simulation rate as a multiple of the TIA bandwidth.
    pub oversampling: f64,
    /// Settling margin before the detection window, in pole time constants.
    pub settle_time_constants: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            oversampling: MIN_OVERSAMPLING,
            settle_time_constants: 50.0,
        }
    }
}

/// Monte-Carlo misclassification rate per `(i_peak, window)` cell with
/// equal priors and the mid-level threshold `Z0·i_peak/2`.
pub fn readout_error_sweep(
    i_peaks: &[f64],
    windows: &[f64],
    m: &TiaModel,
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    readout_error_sweep_with(i_peaks, windows, m, trials, seed, &SweepSettings::default())
}

pub fn readout_error_sweep_with(
    i_peaks: &[f64],
    windows: &[f64],
    m: &TiaModel,
    trials: usize,
    seed: u64,
    settings: &SweepSettings,
) -> Result<Vec<SweepRow>> {
    m.validate()?;
    if trials < 100 {
        return Err(Error::domain(format!(
            "sweep needs at least 100 trials per cell, got {trials}"
        )));
    }
    if settings.oversampling < MIN_OVERSAMPLING {
        return Err(Error::precondition(
            "sweep oversampling below the TIA minimum",
        ));
    }
    if i_peaks.iter().chain(windows).any(|x| !(*x > 0.0)) {
        return Err(Error::domain("peak currents and windows must be positive"));
    }
    let fs = settings.oversampling * m.f3db;
    let settle = settings.settle_time_constants / (2.0 * std::f64::consts::PI * m.pole_frequency());
    let mut rows = Vec::with_capacity(i_peaks.len() * windows.len());
    for (a, &i_peak) in i_peaks.iter().enumerate() {
        for (b, &window) in windows.iter().enumerate() {
            let cell_seed = derive_seed(seed, (a * windows.len() + b) as u64);
            let n_settle = (settle * fs).ceil() as usize;
            let n_window = ((window * fs).round() as usize).max(1);
            let threshold = m.z0() * i_peak / 2.0;
            let errors: Vec<bool> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let present = t % 2 == 1;
                    let level = if present { i_peak } else { 0.0 };
                    let i = Waveform::new(vec![level; n_settle + n_window], fs, 0.0, Unit::Ampere)?;
                    let v = tia_response(&i, m, Some(derive_seed(cell_seed, t)))?;
                    let mean = v.samples[n_settle..].iter().sum::<f64>() / n_window as f64;
                    Ok((mean > threshold) != present)
                })
                .collect::<Result<_>>()?;
            let error_rate = errors.iter().filter(|e| **e).count() as f64 / trials as f64;
            rows.push(SweepRow {
                i_peak,
                window,
                error_rate,
                snr: expected_snr(i_peak, window, m, fs),
            });
        }
    }
    Ok(rows)
}
