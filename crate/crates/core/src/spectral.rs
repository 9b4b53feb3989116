//! Welch power spectral density for real sampled signals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Accumulates one-sided Welch PSDs (Hann window, 50 % overlap, mean
/// removed per segment) over any number of records.
#[derive(Debug, Clone)]
pub struct WelchAccumulator {
    fs: f64,
    seg_len: usize,
    sum: Vec<f64>,
    segments: usize,
}

impl WelchAccumulator {
    pub fn new(fs: f64, seg_len: usize) -> Result<Self> {
        if !(fs > 0.0) || seg_len < 8 {
            return Err(Error::domain(
                "Welch estimator needs fs > 0 and at least 8 samples per segment",
            ));
        }
        Ok(Self {
            fs,
            seg_len,
            sum: vec![0.0; seg_len / 2 + 1],
            segments: 0,
        })
    }

    pub fn add(&mut self, x: &[f64]) {
        let n = self.seg_len;
        let window: Vec<f64> = (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
            .collect();
        let power: f64 = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(n);
        let scale = 2.0 / (self.fs * power);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut start = 0;
        while start + n <= x.len() {
            let seg = &x[start..start + n];
            let mean = seg.iter().sum::<f64>() / n as f64;
            for ((slot, &v), w) in buf.iter_mut().zip(seg).zip(&window) {
                *slot = Complex64::new((v - mean) * w, 0.0);
            }
            fft.process(&mut buf);
            for (acc, c) in self.sum.iter_mut().zip(&buf) {
                *acc += c.norm_sqr() * scale;
            }
            self.segments += 1;
            start += n / 2;
        }
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    /// `(frequency, one-sided PSD)` for every bin above DC.
    pub fn psd(&self) -> Vec<(f64, f64)> {
        let df = self.fs / self.seg_len as f64;
        let n = self.segments.max(1) as f64;
        self.sum
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, s)| (k as f64 * df, s / n))
            .collect()
    }
}

/// Mean PSD over bins within `[f/ratio, f·ratio]`.
pub fn band_average(psd: &[(f64, f64)], f: f64, ratio: f64) -> Option<f64> {
    let band: Vec<f64> = psd
        .iter()
        .filter(|(x, _)| *x >= f / ratio && *x <= f * ratio)
        .map(|p| p.1)
        .collect();
    if band.is_empty() {
        None
    } else {
        Some(band.iter().sum::<f64>() / band.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn white_noise_level() {
        let fs = 1e6;
        let sigma: f64 = 2.0;
        let mut rng = rng_from_seed(3);
        let x: Vec<f64> = (0..1 << 16)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut w = WelchAccumulator::new(fs, 256).unwrap();
        w.add(&x);
        let expected = 2.0 * sigma * sigma / fs;
        let level = band_average(&w.psd(), 1e5, 2.0).unwrap();
        assert!(
            (level / expected - 1.0).abs() < 0.05,
            "{level} vs {expected}"
        );
    }
}
