//! Statistical oracles shared by the integration tests.
#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Exp, Normal};

/// Two-sample-free Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 5 % critical value of the one-sample KS statistic.
pub fn ks_critical_5pct(n: usize) -> f64 {
    1.358 / (n as f64).sqrt()
}

pub fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    let d = Exp::new(rate).unwrap();
    move |x| d.cdf(x)
}

/// Gaussian upper tail probability.
pub fn q_function(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().sf(x)
}

/// Binomial standard deviation of a proportion estimate at true rate `p`.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Wilson score interval for `k` successes in `n` trials at `z` standard deviations.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    let (n, p) = (n as f64, k as f64 / n as f64);
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    (centre - half, centre + half)
}

/// Relative deviation `|a/b − 1|`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}
