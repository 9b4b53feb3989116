use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Volt,
    Ampere,
    Tesla,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Volt => "volt",
            Unit::Ampere => "ampere",
            Unit::Tesla => "tesla",
        })
    }
}

/// A uniformly sampled real signal.
///
/// Sample `k` sits at `t0 + k/fs` and is held over the cell
/// `[t0 + k/fs, t0 + (k+1)/fs)`, so the support is `[t0, t0 + len/fs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub fs: f64,
    pub t0: f64,
    pub unit: Unit,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, fs: f64, t0: f64, unit: Unit) -> Result<Self> {
        if !(fs > 0.0) || !fs.is_finite() {
            return Err(Error::domain(format!(
                "sample rate must be positive, got {fs}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::domain("waveform must hold at least one sample"));
        }
        Ok(Self {
            samples,
            fs,
            t0,
            unit,
        })
    }

    pub fn zeros(len: usize, fs: f64, t0: f64, unit: Unit) -> Result<Self> {
        Self::new(vec![0.0; len], fs, t0, unit)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fs
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 / self.fs
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.fs
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.duration()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * factor).collect(),
            ..self.clone()
        }
    }

    /// Index range of samples whose time lies in `[start, start + len)`.
    pub fn index_range(&self, start: f64, len: f64) -> std::ops::Range<usize> {
        let first = ((start - self.t0) * self.fs - 1e-9).ceil().max(0.0) as usize;
        let last = ((start + len - self.t0) * self.fs - 1e-9).ceil().max(0.0) as usize;
        first.min(self.len())..last.min(self.len())
    }

    /// Integral of the signal over its support.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.fs
    }

    pub fn iter_timed(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.time(k), v))
    }
}
