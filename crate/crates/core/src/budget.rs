//! Electronics-induced infidelity budget for a π/2 gate: carrier detuning,
//! pulse timing, oscillator phase noise and the RWA floor, plus a
//! Monte-Carlo estimator that checks the analytic entries against the
//! spin dynamics.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{gate_infidelity, propagator_envelope, propagator_rwa, RotatingFramePulse};
use crate::error::{Error, Result};
use crate::pulse::phase_diffusion;
use crate::rng::trial_rng;
use crate::stats::MeanEstimate;

/// Calibration anchor for the PN→Δf rule: −74 dBc/Hz at 1 MHz with
/// f_R = 750 MHz corresponds to an 11.8 MHz carrier error.
pub const PN_ANCHOR: (f64, f64, f64) = (-74.0, 750e6, 11.8e6);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetSource {
    CarrierDetuning,
    Timing,
    Pn,
    Rwa,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetEntry {
    pub source: BudgetSource,
    pub infidelity: f64,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

impl BudgetEntry {
    pub fn new(source: BudgetSource, infidelity: f64) -> Result<Self> {
        if !(infidelity >= 0.0) {
            return Err(Error::domain(format!(
                "budget infidelity must be >= 0, got {infidelity}"
            )));
        }
        Ok(Self {
            source,
            infidelity,
            parameters: BTreeMap::new(),
        })
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_owned(), value);
        self
    }
}

fn half_pi(
    f_r: f64,
    detuning: f64,
    duration: f64,
    phase: f64,
) -> Result<crate::dynamics::SpinPropagator> {
    propagator_rwa(&RotatingFramePulse {
        f_r,
        detuning,
        phase,
        duration,
    })
}

/// Exact worst-case infidelity of a π/2 gate driven `delta_f` off resonance.
///
/// The average-gate infidelity for the same error is 2/3 of this value.
pub fn detuning_infidelity(delta_f: f64, f_r: f64) -> Result<f64> {
    if !(f_r > 0.0) {
        return Err(Error::domain(format!(
            "Rabi frequency must be positive, got {f_r}"
        )));
    }
    let t = 1.0 / (4.0 * f_r);
    let u = half_pi(f_r, delta_f, t, 0.0)?;
    let ideal = half_pi(f_r, 0.0, t, 0.0)?;
    gate_infidelity(&u, &ideal)
}

/// Small-error law ε²/2 with ε = Δf/f_R.
pub fn detuning_infidelity_small(delta_f: f64, f_r: f64) -> f64 {
    let eps = delta_f / f_r;
    eps * eps / 2.0
}

/// π/2 gate with duration off by a fraction `epsilon`: sin²(π·ε/4).
pub fn timing_infidelity(epsilon: f64) -> Result<f64> {
    if !(epsilon.abs() < 1.0) {
        return Err(Error::domain(format!(
            "fractional timing error must satisfy |ε| < 1, got {epsilon}"
        )));
    }
    Ok((PI * epsilon / 4.0).sin().powi(2))
}

/// Absolute duration error of a π/2 pulse: ε/(4·f_R).
pub fn timing_tolerance(f_r: f64, epsilon: f64) -> Result<f64> {
    if !(f_r > 0.0) {
        return Err(Error::domain(format!(
            "Rabi frequency must be positive, got {f_r}"
        )));
    }
    Ok(epsilon / (4.0 * f_r))
}

/// Integration bandwidth of the PN→detuning rule, `kappa·f_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PnCalibration {
    pub kappa: f64,
}

impl PnCalibration {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::domain(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        Ok(Self { kappa })
    }

    /// Solve for κ so that (`pn`, `f_r`) maps onto `delta_f` exactly.
    pub fn calibrate(pn_at_1mhz: f64, f_r: f64, delta_f: f64) -> Result<Self> {
        if !pn_at_1mhz.is_finite() || !(f_r > 0.0) || !(delta_f > 0.0) {
            return Err(Error::domain(
                "calibration needs finite PN and positive f_R, Δf",
            ));
        }
        Self::new(delta_f * delta_f / (white_fm_density(pn_at_1mhz) * f_r))
    }

    /// κ* fitted to [`PN_ANCHOR`].
    pub fn reference() -> Self {
        let (pn, f_r, df) = PN_ANCHOR;
        Self::calibrate(pn, f_r, df).expect("anchor values are valid")
    }
}

/// One-sided frequency-noise density of a −20 dB/dec PN profile:
/// S_Δf = (1 MHz)²·2·10^(L/10) in Hz²/Hz.
pub fn white_fm_density(pn_at_1mhz: f64) -> f64 {
    if pn_at_1mhz == f64::NEG_INFINITY {
        return 0.0;
    }
    1e12 * 2.0 * 10f64.powf(pn_at_1mhz / 10.0)
}

/// RMS carrier error `√(S_Δf·κ·f_R)`.
pub fn pn_to_rms_detuning(pn_at_1mhz: f64, f_r: f64, cal: &PnCalibration) -> Result<f64> {
    if pn_at_1mhz.is_nan() || pn_at_1mhz == f64::INFINITY {
        return Err(Error::domain("phase-noise level must be finite or -inf"));
    }
    if !(f_r > 0.0) {
        return Err(Error::domain(format!(
            "Rabi frequency must be positive, got {f_r}"
        )));
    }
    Ok((white_fm_density(pn_at_1mhz) * cal.kappa * f_r).sqrt())
}

/// `(1 − target)/n`: the share each of `n` equal contributions may use.
pub fn equal_allocation(target_fidelity: f64, n: usize) -> Result<f64> {
    if !(target_fidelity > 0.0 && target_fidelity < 1.0) {
        return Err(Error::domain(format!(
            "target fidelity must be in (0, 1), got {target_fidelity}"
        )));
    }
    if n == 0 {
        return Err(Error::domain("cannot split a budget into zero parts"));
    }
    Ok((1.0 - target_fidelity) / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportedEntry {
    #[serde(flatten)]
    pub entry: BudgetEntry,
    /// Equal-split share of the total allowance.
    pub allocation: f64,
    pub overrun: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub sources: Vec<ReportedEntry>,
    pub total_infidelity: f64,
    pub target: f64,
    pub allowed_infidelity: f64,
    pub pass: bool,
}

/// Sum the entries and compare against `1 − target`.
pub fn budget_report(target_fidelity: f64, sources: Vec<BudgetEntry>) -> Result<BudgetReport> {
    let allowed = 1.0 - target_fidelity;
    let allocation = if sources.is_empty() {
        allowed
    } else {
        equal_allocation(target_fidelity, sources.len())?
    };
    if !(allowed > 0.0 && allowed < 1.0) {
        return Err(Error::domain(format!(
            "target fidelity must be in (0, 1), got {target_fidelity}"
        )));
    }
    let total: f64 = sources.iter().map(|e| e.infidelity).sum();
    let sources = sources
        .into_iter()
        .map(|entry| ReportedEntry {
            overrun: entry.infidelity > allocation,
            allocation,
            entry,
        })
        .collect();
    Ok(BudgetReport {
        sources,
        total_infidelity: total,
        target: target_fidelity,
        allowed_infidelity: allowed,
        pass: total <= allowed,
    })
}

/// Control-error model for [`mc_gate_infidelity`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GateNoise {
    /// Static carrier offset (Hz) added to every trial.
    #[serde(default)]
    pub detuning_offset: f64,
    /// Shot-to-shot Gaussian carrier error (Hz).
    #[serde(default)]
    pub detuning_sigma: f64,
    #[serde(default)]
    pub timing_offset: f64,
    /// Shot-to-shot Gaussian fractional duration error.
    #[serde(default)]
    pub timing_sigma: f64,
    /// Oscillator phase noise at 1 MHz (dBc/Hz); the Wiener phase drift
    /// during the pulse distorts the drive envelope.
    #[serde(default)]
    pub pn_at_1mhz: Option<f64>,
}

/// Segments used to discretize the phase-noise envelope.
const PN_SEGMENTS: usize = 64;

fn trial_infidelity(noise: &GateNoise, f_r: f64, seed: u64, index: u64) -> Result<f64> {
    let mut rng = trial_rng(seed, index);
    let z_det: f64 = rng.sample(StandardNormal);
    let z_time: f64 = rng.sample(StandardNormal);
    let detuning = noise.detuning_offset + noise.detuning_sigma * z_det;
    let eps = noise.timing_offset + noise.timing_sigma * z_time;
    let t_ideal = 1.0 / (4.0 * f_r);
    let duration = t_ideal * (1.0 + eps);
    if !(duration >= 0.0) {
        return Err(Error::domain(
            "timing error drove the pulse duration negative",
        ));
    }
    let ideal = half_pi(f_r, 0.0, t_ideal, 0.0)?;
    let u = match noise.pn_at_1mhz {
        Some(pn) if pn > f64::NEG_INFINITY => {
            let dt = duration / PN_SEGMENTS as f64;
            let step = (phase_diffusion(pn) * dt).sqrt();
            let mut phi = 0.0;
            let mut phase = Vec::with_capacity(PN_SEGMENTS);
            for _ in 0..PN_SEGMENTS {
                // Midpoint phase of each segment.
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let mid = phi + step * std::f64::consts::FRAC_1_SQRT_2 * z1;
                phase.push(mid);
                phi = mid + step * std::f64::consts::FRAC_1_SQRT_2 * z2;
            }
            propagator_envelope(f_r, detuning, &vec![1.0; PN_SEGMENTS], &phase, dt)?
        }
        _ => half_pi(f_r, detuning, duration, 0.0)?,
    };
    gate_infidelity(&u, &ideal)
}

/// Monte-Carlo mean worst-case infidelity of a π/2 gate under `noise`.
/// Trial `i` draws from the stream `(seed, i)`, so the estimate does not
/// depend on thread scheduling.
pub fn mc_gate_infidelity(
    noise: &GateNoise,
    f_r: f64,
    trials: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if trials < 100 {
        return Err(Error::domain(format!(
            "Monte-Carlo needs at least 100 trials, got {trials}"
        )));
    }
    if !(f_r > 0.0) {
        return Err(Error::domain(format!(
            "Rabi frequency must be positive, got {f_r}"
        )));
    }
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| trial_infidelity(noise, f_r, seed, i))
        .collect::<Result<_>>()?;
    Ok(MeanEstimate::from_samples(&samples))
}
