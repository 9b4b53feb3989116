//! Single-spin propagators in the rotating and laboratory frames, and the
//! gate-fidelity metrics built on them.
//!
//! Basis ordering is `[|↑⟩, |↓⟩]` with σz|↑⟩ = +|↑⟩. The lab-frame
//! Hamiltonian is `2π·(f_L/2)·σz + 2π·(γ·B(t)/2)·σx`; a linear drive
//! `B1·cos(2π f_L t + φ)` maps in the rotating frame onto
//! `2π·(f_R/2)·(cosφ σx + sinφ σy)` plus counter-rotating terms at 2·f_L.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::resonance::{field_from_rabi, gyromagnetic_ratio};
use crate::waveform::{Unit, Waveform};

/// Tolerance used when checking that a matrix is unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Lab-frame stepping needs at least this many samples per Larmor cycle.
pub const MIN_SAMPLES_PER_LARMOR_CYCLE: f64 = 50.0;

/// Samples per Larmor cycle used by [`rwa_gate_infidelity`].
pub const RWA_SAMPLES_PER_CYCLE: usize = 2000;

/// A 2×2 unitary acting on one spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinPropagator(Mat2);

impl SpinPropagator {
    pub fn identity() -> Self {
        Self(Mat2::IDENTITY)
    }

    /// Wraps `m` after checking unitarity to [`UNITARY_TOL`].
    pub fn new(m: Mat2) -> Result<Self> {
        let err = unitarity_error(&m);
        if err > UNITARY_TOL {
            return Err(Error::domain(format!(
                "matrix is not unitary (max |u†u - I| = {err:.3e})"
            )));
        }
        Ok(Self(m))
    }

    #[cfg(test)]
    pub(crate) fn from_mat_unchecked(m: Mat2) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// `self` applied after `earlier`.
    pub fn then_after(&self, earlier: &SpinPropagator) -> SpinPropagator {
        Self(self.0 * earlier.0)
    }

    pub fn adjoint(&self) -> SpinPropagator {
        Self(self.0.adjoint())
    }

    pub fn with_global_phase(&self, chi: f64) -> SpinPropagator {
        Self(self.0.scale(Complex64::from_polar(1.0, chi)))
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.0)
    }

    /// |⟨↑|U|↓⟩|²: spin-up probability after starting in |↓⟩.
    pub fn spin_up_from_down(&self) -> f64 {
        self.0 .0[0][1].norm_sqr()
    }

    pub fn apply(&self, psi: [Complex64; 2]) -> [Complex64; 2] {
        self.0.apply(psi)
    }

    pub fn max_abs_diff(&self, other: &SpinPropagator) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

fn unitarity_error(m: &Mat2) -> f64 {
    (m.adjoint() * *m).max_abs_diff(&Mat2::IDENTITY)
}

/// A square pulse in the frame rotating at the drive frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatingFramePulse {
    /// Rabi frequency (Hz).
    pub f_r: f64,
    /// Drive frequency minus Larmor frequency (Hz).
    pub detuning: f64,
    pub phase: f64,
    /// Seconds.
    pub duration: f64,
}

impl RotatingFramePulse {
    /// A resonant pulse rotating by `angle` about the axis set by `phase`.
    pub fn rotation(f_r: f64, angle: f64, phase: f64) -> Self {
        Self {
            f_r,
            detuning: 0.0,
            phase,
            duration: angle / (2.0 * PI * f_r),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration >= 0.0) {
            return Err(Error::domain(format!(
                "pulse duration must be >= 0, got {}",
                self.duration
            )));
        }
        if !(self.f_r >= 0.0) {
            return Err(Error::domain(format!(
                "Rabi frequency must be >= 0, got {}",
                self.f_r
            )));
        }
        if !self.detuning.is_finite() || !self.phase.is_finite() {
            return Err(Error::domain("detuning and phase must be finite"));
        }
        Ok(())
    }
}

/// Closed-form rotating-frame propagator
/// `cos(Θ/2)·I − i·sin(Θ/2)·(n̂·σ)`.
pub fn propagator_rwa(p: &RotatingFramePulse) -> Result<SpinPropagator> {
    p.validate()?;
    let gen = (p.f_r * p.f_r + p.detuning * p.detuning).sqrt();
    if gen == 0.0 {
        return Ok(SpinPropagator::identity());
    }
    let (sp, cp) = p.phase.sin_cos();
    let n = [p.f_r * cp / gen, p.f_r * sp / gen, p.detuning / gen];
    let theta = 2.0 * PI * gen * p.duration;
    Ok(SpinPropagator(Mat2::su2(theta, n)))
}

/// Rabi formula for the spin-up probability starting from |↓⟩.
pub fn rabi_lineshape(f_r: f64, detuning: f64, t: f64) -> f64 {
    let gen2 = f_r * f_r + detuning * detuning;
    if gen2 == 0.0 {
        return 0.0;
    }
    let s = (PI * gen2.sqrt() * t).sin();
    f_r * f_r / gen2 * s * s
}

/// Piecewise-constant rotating-frame evolution under a slowly varying
/// complex envelope: segment `k` drives at `f_r·amplitude[k]` with phase
/// `phase[k]` for `dt` seconds.
pub fn propagator_envelope(
    f_r: f64,
    detuning: f64,
    amplitude: &[f64],
    phase: &[f64],
    dt: f64,
) -> Result<SpinPropagator> {
    if amplitude.len() != phase.len() {
        return Err(Error::domain("envelope amplitude and phase lengths differ"));
    }
    let mut u = SpinPropagator::identity();
    for (&a, &ph) in amplitude.iter().zip(phase) {
        let step = propagator_rwa(&RotatingFramePulse {
            f_r: f_r * a,
            detuning,
            phase: ph,
            duration: dt,
        })?;
        u = step.then_after(&u);
    }
    Ok(u)
}

/// Exact lab-frame evolution under a sampled field waveform.
///
/// Each sample is held over its cell and the cell propagator is the exact
/// exponential of `2π·(f_L/2)·σz + 2π·(γ·B_k/2)·σx`.
pub fn evolve_labframe(b_field: &Waveform, f_l: f64, g: f64) -> Result<SpinPropagator> {
    if b_field.unit != Unit::Tesla {
        return Err(Error::UnitMismatch {
            expected: Unit::Tesla,
            found: b_field.unit,
        });
    }
    if !(f_l >= 0.0) {
        return Err(Error::domain(format!(
            "Larmor frequency must be >= 0, got {f_l}"
        )));
    }
    let required = MIN_SAMPLES_PER_LARMOR_CYCLE * f_l;
    if b_field.fs < required {
        return Err(Error::precondition(format!(
            "lab-frame stepping needs fs >= {required:.4e} Hz (50 samples per Larmor cycle), got {:.4e} Hz",
            b_field.fs
        )));
    }
    let gamma = gyromagnetic_ratio(g);
    let dt = b_field.dt();
    let mut u = Mat2::IDENTITY;
    for &b in &b_field.samples {
        let step = Mat2::exp_pauli([gamma * b / 2.0, 0.0, f_l / 2.0], dt);
        u = step * u;
    }
    Ok(SpinPropagator(u))
}

/// Moves a lab-frame propagator over `[t_start, t_end]` into the frame
/// rotating at `f_l` (frame aligned with the lab at t = 0).
pub fn to_rotating_frame(
    u_lab: &SpinPropagator,
    f_l: f64,
    t_start: f64,
    t_end: f64,
) -> SpinPropagator {
    let w = 2.0 * PI * f_l;
    let out = Mat2::z_phase(w * t_end / 2.0) * u_lab.0 * Mat2::z_phase(-w * t_start / 2.0);
    SpinPropagator(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityMetric {
    /// 1 − (|Tr(U_id†U)|/2)²: the worst-case state infidelity sin²(α/2).
    #[default]
    WorstCaseState,
    /// F = (|Tr(U_id†U)|² + 2)/6.
    AverageGate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub infidelity: f64,
    pub metric: FidelityMetric,
}

/// Infidelity of `u` against the target `u_id`; insensitive to global phase.
pub fn infidelity(
    u: &SpinPropagator,
    u_id: &SpinPropagator,
    metric: FidelityMetric,
) -> Result<FidelityReport> {
    for (name, m) in [("u", u), ("u_id", u_id)] {
        let err = m.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::domain(format!(
                "{name} is not unitary (max |u†u - I| = {err:.3e})"
            )));
        }
    }
    let worst = worst_case_infidelity(&u_id.0.adjoint(), &u.0);
    let infid = match metric {
        FidelityMetric::WorstCaseState => worst,
        // (|Tr|² + 2)/6 with |Tr|² = 4(1 − worst).
        FidelityMetric::AverageGate => 2.0 * worst / 3.0,
    };
    Ok(FidelityReport {
        fidelity: 1.0 - infid,
        infidelity: infid,
        metric,
    })
}

/// sin²(α/2) of the error unitary `a·b`, read off its traceless part so
/// that small infidelities keep full relative precision.
fn worst_case_infidelity(a: &Mat2, b: &Mat2) -> f64 {
    let e = *a * *b;
    let half_tr = e.trace() * 0.5;
    let d0 = e.0[0][0] - half_tr;
    let d1 = e.0[1][1] - half_tr;
    let off = d0.norm_sqr() + d1.norm_sqr() + e.0[0][1].norm_sqr() + e.0[1][0].norm_sqr();
    (off / 2.0).clamp(0.0, 1.0)
}

/// Worst-case infidelity shorthand.
pub fn gate_infidelity(u: &SpinPropagator, u_id: &SpinPropagator) -> Result<f64> {
    Ok(infidelity(u, u_id, FidelityMetric::WorstCaseState)?.infidelity)
}

/// Lab-frame π/2 pulse at `f_L = ratio·f_R`, sampled with cell averages of
/// `B1·cos(2π f_L t + φ)` at `samples_per_cycle` samples per Larmor cycle.
pub fn labframe_half_pi_drive(
    ratio: f64,
    phase: f64,
    samples_per_cycle: usize,
) -> Result<(Waveform, f64, f64)> {
    const G: f64 = 2.0;
    const F_L: f64 = 60e9;
    let f_r = F_L / ratio;
    let duration = 1.0 / (4.0 * f_r);
    let n = (duration * F_L * samples_per_cycle as f64).ceil() as usize;
    let fs = n as f64 / duration;
    let b1 = field_from_rabi(G, f_r)?;
    let w = 2.0 * PI * F_L;
    let samples = (0..n)
        .map(|k| {
            let (ta, tb) = (k as f64 / fs, (k + 1) as f64 / fs);
            b1 * ((w * tb + phase).sin() - (w * ta + phase).sin()) / (w / fs)
        })
        .collect();
    Ok((Waveform::new(samples, fs, 0.0, Unit::Tesla)?, F_L, f_r))
}

/// Infidelity of a lab-frame π/2 pulse against the ideal rotating-frame π/2
/// at a single drive phase.
pub fn rwa_gate_infidelity_at(ratio: f64, phase: f64, samples_per_cycle: usize) -> Result<f64> {
    if !(ratio >= 2.0) {
        return Err(Error::domain(format!(
            "f_L/f_R ratio must be >= 2 for the RWA to apply, got {ratio}"
        )));
    }
    let (drive, f_l, f_r) = labframe_half_pi_drive(ratio, phase, samples_per_cycle)?;
    let u_lab = evolve_labframe(&drive, f_l, 2.0)?;
    let u_rot = to_rotating_frame(&u_lab, f_l, drive.t0, drive.t_end());
    let ideal = propagator_rwa(&RotatingFramePulse::rotation(f_r, PI / 2.0, phase))?;
    gate_infidelity(&u_rot, &ideal)
}

/// Infidelity from the counter-rotating drive component for a π/2 gate.
///
/// With `phase = None` the worst case over an 8-point phase grid on
/// `[0, 2π)` is returned.
pub fn rwa_gate_infidelity(ratio: f64, phase: Option<f64>) -> Result<f64> {
    match phase {
        Some(p) => rwa_gate_infidelity_at(ratio, p, RWA_SAMPLES_PER_CYCLE),
        None => Ok(rwa_phase_scan(ratio, 8)?
            .into_iter()
            .map(|(_, i)| i)
            .fold(0.0, f64::max)),
    }
}

/// `(phase, infidelity)` on an evenly spaced phase grid.
pub fn rwa_phase_scan(ratio: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    (0..points)
        .into_par_iter()
        .map(|k| {
            let phase = 2.0 * PI * k as f64 / points as f64;
            Ok((
                phase,
                rwa_gate_infidelity_at(ratio, phase, RWA_SAMPLES_PER_CYCLE)?,
            ))
        })
        .collect()
}
