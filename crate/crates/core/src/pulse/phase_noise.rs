//! Phase-noise measurement of synthesized carriers.
//!
//! The carrier is mixed to baseband with a known local oscillator, reduced
//! with a boxcar decimator, and its unwrapped phase is fed to a Welch PSD
//! (Hann window, 50 % overlap, per-segment linear detrend). The ensemble
//! average is reported as L(f) = S_φ(f)/2 after undoing the boxcar response.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::waveform::Waveform;

const MIN_REALIZATIONS: usize = 10;
/// Reporting floor for an exactly clean carrier (dBc/Hz).
const FLOOR_DBC: f64 = -300.0;

/// Unwrapped baseband phase of `w` around `carrier`, decimated by `decimation`.
pub fn extract_phase(w: &Waveform, carrier: f64, decimation: usize) -> Vec<f64> {
    let m = decimation.max(1);
    let cycles_per_sample = carrier / w.fs;
    let mut out = Vec::with_capacity(w.len() / m);
    let mut prev = 0.0;
    let mut offset = 0.0;
    for (block_idx, block) in w.samples.chunks_exact(m).enumerate() {
        let base = block_idx * m;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &v) in block.iter().enumerate() {
            let lo = -2.0 * PI * ((base + i) as f64 * cycles_per_sample).fract();
            acc += Complex64::from_polar(v, lo);
        }
        let raw = acc.arg();
        if !out.is_empty() {
            let d = raw - prev;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        prev = raw;
        out.push(raw + offset);
    }
    out
}

/// Streaming ensemble estimator of single-sideband phase noise.
pub struct PhaseNoiseEstimator {
    carrier: f64,
    fs_in: f64,
    record_len: usize,
    decimation: usize,
    fs_dec: f64,
    seg_len: usize,
    window: Vec<f64>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
    psd_sum: Vec<f64>,
    segments: usize,
    realizations: usize,
}

impl PhaseNoiseEstimator {
    /// Configure for records of `record_len` samples at `fs`, resolving
    /// offsets up to `max_offset`.
    pub fn new(carrier: f64, max_offset: f64, fs: f64, record_len: usize) -> Result<Self> {
        if !(carrier > 0.0 && max_offset > 0.0 && fs > 2.0 * carrier) {
            return Err(Error::domain(
                "carrier, offsets and sample rate must be positive with fs > 2·carrier",
            ));
        }
        let target_rate = 20.0 * max_offset;
        let mut decimation = ((fs / target_rate).floor() as usize).max(1);
        if decimation > 1 && decimation % 2 == 1 {
            decimation -= 1;
        }
        let fs_dec = fs / decimation as f64;
        let n_dec = record_len / decimation;
        let seg_len = n_dec / 2;
        if seg_len < 16 {
            return Err(Error::precondition(format!(
                "record of {record_len} samples is too short for phase-noise estimation"
            )));
        }
        let window: Vec<f64> = (0..seg_len)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg_len as f64).cos())
            .collect();
        let window_power = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(seg_len);
        Ok(Self {
            carrier,
            fs_in: fs,
            record_len,
            decimation,
            fs_dec,
            seg_len,
            window,
            window_power,
            fft,
            psd_sum: vec![0.0; seg_len / 2 + 1],
            segments: 0,
            realizations: 0,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.fs_dec / self.seg_len as f64
    }

    pub fn realizations(&self) -> usize {
        self.realizations
    }

    /// Sum of one-sided phase periodograms over the Welch segments of `w`,
    /// with the segment count.
    pub fn realization_psd(&self, w: &Waveform) -> Result<(Vec<f64>, usize)> {
        if (w.fs - self.fs_in).abs() > 1e-9 * self.fs_in || w.len() != self.record_len {
            return Err(Error::precondition(
                "ensemble members must share the sample rate and length the estimator was built for",
            ));
        }
        let phase = extract_phase(w, self.carrier, self.decimation);
        let hop = self.seg_len / 2;
        let mut psd = vec![0.0; self.psd_sum.len()];
        let mut count = 0;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.seg_len];
        let mut start = 0;
        while start + self.seg_len <= phase.len() {
            let seg = &phase[start..start + self.seg_len];
            let (a, b) = linear_fit(seg);
            for (i, (slot, &x)) in buf.iter_mut().zip(seg).enumerate() {
                *slot = Complex64::new((x - a - b * i as f64) * self.window[i], 0.0);
            }
            self.fft.process(&mut buf);
            let scale = 2.0 / (self.fs_dec * self.window_power);
            for (k, p) in psd.iter_mut().enumerate() {
                *p += buf[k].norm_sqr() * scale;
            }
            count += 1;
            start += hop;
        }
        Ok((psd, count))
    }

    pub fn add_psd(&mut self, psd: &[f64], segments: usize) {
        for (acc, p) in self.psd_sum.iter_mut().zip(psd) {
            *acc += p;
        }
        self.segments += segments;
        self.realizations += 1;
    }

    pub fn add(&mut self, w: &Waveform) -> Result<()> {
        let (psd, n) = self.realization_psd(w)?;
        self.add_psd(&psd, n);
        Ok(())
    }

    fn boxcar_gain2(&self, f: f64) -> f64 {
        let m = self.decimation as f64;
        let x = PI * f / self.fs_in;
        if x == 0.0 {
            return 1.0;
        }
        let g = (m * x).sin() / (m * x.sin());
        g * g
    }

    /// Ensemble-averaged one-sided phase PSD S_φ at each FFT bin.
    pub fn phase_psd(&self) -> Vec<(f64, f64)> {
        let n = self.segments.max(1) as f64;
        self.psd_sum
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, s)| {
                let f = k as f64 * self.resolution();
                (f, s / n / self.boxcar_gain2(f))
            })
            .collect()
    }

    /// L(offset) in dBc/Hz from a local power-law fit around the offset.
    pub fn level_dbc(&self, offset: f64) -> Result<f64> {
        if self.realizations < MIN_REALIZATIONS {
            return Err(Error::precondition(format!(
                "phase-noise estimation needs at least {MIN_REALIZATIONS} realizations, got {}",
                self.realizations
            )));
        }
        let duration = self.record_len as f64 / self.fs_in;
        if offset < 1.0 / duration {
            return Err(Error::domain(format!(
                "offset {offset:.3e} Hz is below the record resolution 1/duration = {:.3e} Hz",
                1.0 / duration
            )));
        }
        if offset >= 0.4 * self.fs_dec {
            return Err(Error::domain(format!(
                "offset {offset:.3e} Hz exceeds the analysis band"
            )));
        }
        let psd = self.phase_psd();
        let band: Vec<(f64, f64)> = psd
            .iter()
            .copied()
            .filter(|&(f, _)| f >= offset / 1.25 && f <= offset * 1.25)
            .collect();
        let band = if band.len() >= 2 {
            band
        } else {
            let mut nearest = psd.clone();
            nearest.sort_by(|a, b| (a.0 - offset).abs().total_cmp(&(b.0 - offset).abs()));
            nearest.truncate(3);
            nearest
        };
        if band.iter().all(|&(_, s)| s <= 0.0) {
            return Ok(FLOOR_DBC);
        }
        let tiny = f64::MIN_POSITIVE;
        let xs: Vec<f64> = band.iter().map(|&(f, _)| f.ln()).collect();
        let ys: Vec<f64> = band.iter().map(|&(_, s)| s.max(tiny).ln()).collect();
        let (a, b) = least_squares(&xs, &ys);
        let s_phi = (a + b * offset.ln()).exp();
        Ok((10.0 * (s_phi / 2.0).log10()).max(FLOOR_DBC))
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

fn linear_fit(seg: &[f64]) -> (f64, f64) {
    let xs: Vec<f64> = (0..seg.len()).map(|i| i as f64).collect();
    least_squares(&xs, seg)
}

/// L(f) in dBc/Hz at each offset, averaged over `ensemble`.
pub fn estimate_phase_noise(
    ensemble: &[Waveform],
    carrier: f64,
    offsets: &[f64],
) -> Result<Vec<f64>> {
    let first = ensemble
        .first()
        .ok_or_else(|| Error::precondition("phase-noise estimation needs a non-empty ensemble"))?;
    let max_offset = offsets.iter().copied().fold(0.0, f64::max);
    let mut est = PhaseNoiseEstimator::new(carrier, max_offset, first.fs, first.len())?;
    for w in ensemble {
        est.add(w)?;
    }
    offsets.iter().map(|&f| est.level_dbc(f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{synthesize_vco, VcoSpec};

    #[test]
    fn phase_extraction_tracks_a_known_offset() {
        let spec = VcoSpec {
            pn_at_1mhz: f64::NEG_INFINITY,
            ..VcoSpec::default()
        };
        let w = synthesize_vco(&spec, 10e-9, 240e9, 0).unwrap();
        let phi = extract_phase(&w, 60e9, 24);
        assert!(phi.iter().all(|p| p.abs() < 1e-9));
        // A carrier 10 MHz below the LO shows up as a falling phase ramp.
        let w = synthesize_vco(
            &VcoSpec {
                f_c: 59.99e9,
                ..spec
            },
            10e-9,
            240e9,
            0,
        )
        .unwrap();
        let phi = extract_phase(&w, 60e9, 24);
        let n = phi.len() - 1;
        let slope = (phi[n] - phi[10]) / ((n - 10) as f64 * 1e-10);
        // The residual image term leaves a ripple of order 1e-3 rad on the ramp.
        assert!((slope / (2.0 * PI) + 10e6).abs() < 5e4, "{slope}");
    }

    #[test]
    fn clean_ensemble_sits_below_the_floor() {
        let spec = VcoSpec {
            pn_at_1mhz: f64::NEG_INFINITY,
            ..VcoSpec::default()
        };
        let ensemble: Vec<_> = (0..10)
            .map(|s| synthesize_vco(&spec, 4e-6, 240e9, s).unwrap())
            .collect();
        let l = estimate_phase_noise(&ensemble, 60e9, &[1e6, 5e6]).unwrap();
        assert!(l.iter().all(|&x| x < -140.0), "{l:?}");
    }

    #[test]
    fn rejects_small_ensembles_and_unresolvable_offsets() {
        let spec = VcoSpec::default();
        let ensemble: Vec<_> = (0..3)
            .map(|s| synthesize_vco(&spec, 2e-6, 240e9, s).unwrap())
            .collect();
        assert!(estimate_phase_noise(&ensemble, 60e9, &[2e6]).is_err());
        let ensemble: Vec<_> = (0..10)
            .map(|s| synthesize_vco(&spec, 2e-6, 240e9, s).unwrap())
            .collect();
        let err = estimate_phase_noise(&ensemble, 60e9, &[1e5, 2e6]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn doubling_amplitude_leaves_phase_noise_unchanged() {
        let spec = VcoSpec::default();
        let loud = VcoSpec {
            amplitude: 1.6,
            ..spec
        };
        let a: Vec<_> = (0..10)
            .map(|s| synthesize_vco(&spec, 4e-6, 240e9, s).unwrap())
            .collect();
        let b: Vec<_> = (0..10)
            .map(|s| synthesize_vco(&loud, 4e-6, 240e9, s).unwrap())
            .collect();
        // The carrier power itself quadruples.
        let pa: f64 = a[0].samples.iter().map(|v| v * v).sum();
        let pb: f64 = b[0].samples.iter().map(|v| v * v).sum();
        assert!((pb / pa - 4.0).abs() < 1e-9);
        let la = estimate_phase_noise(&a, 60e9, &[2e6]).unwrap();
        let lb = estimate_phase_noise(&b, 60e9, &[2e6]).unwrap();
        assert!((la[0] - lb[0]).abs() < 1e-6);
    }
}
