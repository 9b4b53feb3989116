//! Behavioral pulse generator: a free-running VCO with Wiener phase noise
//! and a startup transient, gated by pass/shunt switches with finite edges
//! and isolation, followed by conversion of the drive into a magnetic field.

mod phase_noise;

pub use phase_noise::{estimate_phase_noise, extract_phase, PhaseNoiseEstimator};

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::waveform::{Unit, Waveform};

/// VCO tuning range (Hz).
pub const TUNING_RANGE: (f64, f64) = (57e9, 65e9);
/// Startup time constant that puts 98% settling near 200 ps.
pub const DEFAULT_STARTUP_TAU: f64 = 50e-12;
pub const DEFAULT_OFF_ISOLATION_DB: f64 = 40.0;
/// Phase noise at 1 MHz offset from a 60 GHz carrier (dBc/Hz).
pub const PN_300K: f64 = -90.0;
pub const PN_77K: f64 = -100.0;

const PN_REFERENCE_OFFSET: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VcoSpec {
    /// Carrier frequency (Hz).
    pub f_c: f64,
    /// Single-sideband phase noise at 1 MHz offset (dBc/Hz); `-inf` (`null`
    /// in JSON) gives a clean carrier.
    #[serde(with = "neg_inf_as_null")]
    pub pn_at_1mhz: f64,
    /// Output amplitude (V).
    pub amplitude: f64,
    pub startup_tau: f64,
    /// Apply the `1 - exp(-t/τ)` startup envelope.
    pub model_startup: bool,
}

impl Default for VcoSpec {
    fn default() -> Self {
        Self {
            f_c: 60e9,
            pn_at_1mhz: PN_300K,
            amplitude: 0.8,
            startup_tau: DEFAULT_STARTUP_TAU,
            model_startup: false,
        }
    }
}

impl VcoSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = TUNING_RANGE;
        if !(self.f_c >= lo && self.f_c <= hi) {
            return Err(Error::domain(format!(
                "carrier {:.3} GHz is outside the {:.0}-{:.0} GHz tuning range",
                self.f_c / 1e9,
                lo / 1e9,
                hi / 1e9
            )));
        }
        if !(self.amplitude > 0.0) {
            return Err(Error::domain(format!(
                "VCO amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if self.pn_at_1mhz.is_nan() || self.pn_at_1mhz == f64::INFINITY {
            return Err(Error::domain("phase-noise level must be finite or -inf"));
        }
        if !(self.startup_tau >= 0.0) {
            return Err(Error::domain("startup time constant must be >= 0"));
        }
        Ok(())
    }

    /// Diffusion constant D of the Wiener phase, Var[φ(t+τ) − φ(t)] = D·τ.
    ///
    /// With L(f) = S_φ(f)/2 and S_φ(f) = D/(2π² f²) one-sided, a −20 dB/dec
    /// profile pinned at L(1 MHz) gives D = 4π²·(1 MHz)²·10^(L/10).
    pub fn phase_diffusion(&self) -> f64 {
        phase_diffusion(self.pn_at_1mhz)
    }

    fn envelope(&self, t: f64) -> f64 {
        if self.model_startup && self.startup_tau > 0.0 {
            1.0 - (-t / self.startup_tau).exp()
        } else {
            1.0
        }
    }
}

pub fn phase_diffusion(pn_at_1mhz: f64) -> f64 {
    if pn_at_1mhz == f64::NEG_INFINITY {
        return 0.0;
    }
    4.0 * PI * PI * PN_REFERENCE_OFFSET * PN_REFERENCE_OFFSET * 10f64.powf(pn_at_1mhz / 10.0)
}

/// Wiener phase path with `n` samples at `fs`, starting at zero.
pub fn wiener_phase(diffusion: f64, n: usize, fs: f64, seed: u64) -> Vec<f64> {
    let mut path = Vec::with_capacity(n);
    if diffusion == 0.0 {
        path.resize(n, 0.0);
        return path;
    }
    let step = (diffusion / fs).sqrt();
    let mut rng = rng_from_seed(seed);
    let mut phi = 0.0;
    for _ in 0..n {
        path.push(phi);
        let z: f64 = rng.sample(StandardNormal);
        phi += step * z;
    }
    path
}

fn check_synthesis(spec: &VcoSpec, duration: f64, fs: f64) -> Result<usize> {
    spec.validate()?;
    if !(duration > 0.0) {
        return Err(Error::domain(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if !(fs >= 4.0 * spec.f_c) {
        return Err(Error::precondition(format!(
            "VCO synthesis needs fs >= 4·f_c = {:.4e} Hz, got {fs:.4e} Hz",
            4.0 * spec.f_c
        )));
    }
    Ok(((duration * fs).round() as usize).max(1))
}

/// `A·env(t)·cos(2π f_c t + φ(t))` sampled from t = 0. Deterministic per seed.
pub fn synthesize_vco(spec: &VcoSpec, duration: f64, fs: f64, seed: u64) -> Result<Waveform> {
    let n = check_synthesis(spec, duration, fs)?;
    let phase = wiener_phase(spec.phase_diffusion(), n, fs, seed);
    let cycles_per_sample = spec.f_c / fs;
    let samples = phase
        .iter()
        .enumerate()
        .map(|(k, phi)| {
            let t = k as f64 / fs;
            // Reduce the carrier phase modulo one cycle before scaling by 2π.
            let carrier = (k as f64 * cycles_per_sample).fract();
            spec.amplitude * spec.envelope(t) * (2.0 * PI * carrier + phi).cos()
        })
        .collect();
    Waveform::new(samples, fs, 0.0, Unit::Volt)
}

/// Complex envelope of the gated generator output relative to the carrier.
///
/// `amplitude[k]·exp(i·phase[k])` is the baseband equivalent of the
/// passband waveform, letting the spin dynamics run in the rotating frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnvelope {
    pub fs: f64,
    pub t0: f64,
    /// Normalized to the VCO amplitude.
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
}

/// Baseband counterpart of `gate_switch(synthesize_vco(..))`. The phase path
/// is the same realization `synthesize_vco` uses for an equal seed.
pub fn synthesize_envelope(
    spec: &VcoSpec,
    switch: Option<&SwitchSpec>,
    duration: f64,
    fs: f64,
    seed: u64,
) -> Result<ComplexEnvelope> {
    spec.validate()?;
    if !(duration > 0.0) || !(fs > 0.0) {
        return Err(Error::domain("duration and sample rate must be positive"));
    }
    let n = ((duration * fs).round() as usize).max(1);
    if let Some(sw) = switch {
        sw.validate()?;
        if sw.t_start < 0.0 || sw.t_end() > duration + 0.5 / fs {
            return Err(Error::precondition(
                "switch window exceeds envelope support",
            ));
        }
    }
    let phase = wiener_phase(spec.phase_diffusion(), n, fs, seed);
    let amplitude = (0..n)
        .map(|k| {
            let t = k as f64 / fs;
            let gate = switch.map_or(1.0, |sw| sw.transmission(t));
            spec.envelope(t) * gate
        })
        .collect();
    Ok(ComplexEnvelope {
        fs,
        t0: 0.0,
        amplitude,
        phase,
    })
}

/// `t_settle = −τ·ln(1 − threshold)`.
pub fn startup_settling_time(spec: &VcoSpec, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::domain(format!(
            "settling threshold must be in (0, 1), got {threshold}"
        )));
    }
    Ok(-spec.startup_tau * (1.0 - threshold).ln())
}

/// Timing of the gating switch control signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchSpec {
    pub t_start: f64,
    pub t_on: f64,
    pub rise: f64,
    pub fall: f64,
    /// Off-state attenuation (dB); `inf` (`null` in JSON) is a perfect switch.
    #[serde(with = "inf_as_null")]
    pub off_isolation_db: f64,
}

impl SwitchSpec {
    /// Ideal rectangular gate.
    pub fn ideal(t_start: f64, t_on: f64) -> Self {
        Self {
            t_start,
            t_on,
            rise: 0.0,
            fall: 0.0,
            off_isolation_db: f64::INFINITY,
        }
    }

    /// Edges of Δt/2 each, where Δt is the tolerated duration error.
    pub fn with_timing_budget(t_start: f64, t_on: f64, delta_t: f64) -> Self {
        Self {
            t_start,
            t_on,
            rise: delta_t / 2.0,
            fall: delta_t / 2.0,
            off_isolation_db: DEFAULT_OFF_ISOLATION_DB,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_on >= 0.0 && self.rise >= 0.0 && self.fall >= 0.0) {
            return Err(Error::domain("switch on-time and edges must be >= 0"));
        }
        if !(self.off_isolation_db >= 0.0) {
            return Err(Error::domain("switch off-isolation must be >= 0 dB"));
        }
        if !self.t_start.is_finite() {
            return Err(Error::domain("switch start time must be finite"));
        }
        Ok(())
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.rise + self.t_on + self.fall
    }

    /// Trapezoid area: `t_on + (rise + fall)/2`.
    pub fn envelope_area(&self) -> f64 {
        self.t_on + 0.5 * (self.rise + self.fall)
    }

    /// Piecewise-linear control envelope e(t) in [0, 1].
    pub fn envelope(&self, t: f64) -> f64 {
        let t_rise_end = self.t_start + self.rise;
        let t_fall_start = t_rise_end + self.t_on;
        let t_end = t_fall_start + self.fall;
        if t < self.t_start || t >= t_end {
            0.0
        } else if t < t_rise_end {
            (t - self.t_start) / self.rise
        } else if t < t_fall_start {
            1.0
        } else {
            (t_end - t) / self.fall
        }
    }

    fn leakage(&self) -> f64 {
        10f64.powf(-self.off_isolation_db / 20.0)
    }

    /// Amplitude transmission: `e(t) + 10^(−iso/20)·(1 − e(t))`.
    pub fn transmission(&self, t: f64) -> f64 {
        let e = self.envelope(t);
        e + self.leakage() * (1.0 - e)
    }
}

/// Gate `w` through the switch.
pub fn gate_switch(w: &Waveform, sw: &SwitchSpec) -> Result<Waveform> {
    sw.validate()?;
    let tol = 1e-6 / w.fs;
    if sw.t_start < w.t0 - tol || sw.t_end() > w.t_end() + tol {
        return Err(Error::precondition(format!(
            "switch window [{:.4e}, {:.4e}] s exceeds waveform support [{:.4e}, {:.4e}] s",
            sw.t_start,
            sw.t_end(),
            w.t0,
            w.t_end()
        )));
    }
    let samples = w
        .iter_timed()
        .map(|(t, v)| v * sw.transmission(t))
        .collect();
    Ok(Waveform {
        samples,
        ..w.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DriveMode {
    /// Current through an ESR line: B = α_I·I.
    Esr,
    /// Voltage on a gate: B = α_V·V.
    Edsr,
}

impl DriveMode {
    pub fn input_unit(self) -> Unit {
        match self {
            DriveMode::Esr => Unit::Ampere,
            DriveMode::Edsr => Unit::Volt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConversion {
    pub mode: DriveMode,
    /// T/A for ESR, T/V for EDSR.
    pub alpha: f64,
}

impl DriveConversion {
    pub fn new(mode: DriveMode, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::domain(format!(
                "conversion factor must be >= 0, got {alpha}"
            )));
        }
        Ok(Self { mode, alpha })
    }

    /// Synthetic conversion factor that makes a drive of `amplitude`
    /// (V or A) produce Rabi frequency `f_r`. No measured value exists.
    pub fn for_rabi(mode: DriveMode, g: f64, f_r: f64, amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0) {
            return Err(Error::domain("drive amplitude must be positive"));
        }
        let b1 = crate::resonance::field_from_rabi(g, f_r)?;
        Self::new(mode, b1 / amplitude)
    }
}

/// Pointwise `B(t) = α·x(t)`.
pub fn drive_field(w: &Waveform, c: &DriveConversion) -> Result<Waveform> {
    let expected = c.mode.input_unit();
    if w.unit != expected {
        return Err(Error::UnitMismatch {
            expected,
            found: w.unit,
        });
    }
    let mut out = w.scaled(c.alpha);
    out.unit = Unit::Tesla;
    Ok(out)
}

mod neg_inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::NEG_INFINITY {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
