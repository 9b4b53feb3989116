//! Small estimators shared by the Monte-Carlo drivers.

use serde::{Deserialize, Serialize};

/// Two-sided 95 % normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sample mean with a normal-approximation 95 % confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std: f64,
    /// Half-width of the 95 % confidence interval.
    pub ci95: f64,
    pub trials: usize,
}

impl MeanEstimate {
    /// Summation runs in slice order, so the result does not depend on
    /// how the samples were produced.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                ci95: f64::NAN,
                trials: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let std = var.sqrt();
        Self {
            mean,
            std,
            ci95: Z95 * std / (n as f64).sqrt(),
            trials: n,
        }
    }
}

/// Binomial proportion with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub successes: usize,
    pub trials: usize,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ProportionEstimate {
    pub fn new(successes: usize, trials: usize) -> Self {
        if trials == 0 {
            return Self {
                successes,
                trials,
                p: f64::NAN,
                ci_low: 0.0,
                ci_high: 1.0,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            successes,
            trials,
            p,
            ci_low: (centre - half).max(0.0),
            ci_high: (centre + half).min(1.0),
        }
    }

    /// Binomial standard deviation of the estimate if the true rate were `p_true`.
    pub fn sigma_at(&self, p_true: f64) -> f64 {
        (p_true * (1.0 - p_true) / self.trials as f64).sqrt()
    }
}
