//! Physical constants and closed-form spin-resonance relations.
//!
//! Constants are frozen at CODATA 2018. All public frequencies are cyclic
//! (Hz); angular forms appear only inside the dynamics kernels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planck constant (J·s), exact.
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = H / (2.0 * PI);
/// Boltzmann constant (J/K), exact.
pub const K_B: f64 = 1.380_649e-23;
/// Elementary charge (C), exact.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Bohr magneton (J/T).
pub const MU_B: f64 = 9.274_010_078_3e-24;
/// Bohr magneton (eV/T).
pub const MU_B_EV: f64 = 5.788_381_806_0e-5;

/// The constant set as a value, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub h: f64,
    pub hbar: f64,
    pub k_b: f64,
    pub mu_b: f64,
    pub mu_b_ev: f64,
    pub e_charge: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    h: H,
    hbar: HBAR,
    k_b: K_B,
    mu_b: MU_B,
    mu_b_ev: MU_B_EV,
    e_charge: E_CHARGE,
};

/// Joules to electron-volts.
pub fn joule_to_ev(e: f64) -> f64 {
    e / E_CHARGE
}

/// Gyromagnetic ratio γ = g·μ_B/h in Hz/T.
pub fn gyromagnetic_ratio(g: f64) -> f64 {
    g * MU_B / H
}

/// An energy splitting together with its cyclic frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Splitting {
    /// Energy in eV.
    pub energy_ev: f64,
    /// Frequency in Hz.
    pub freq_hz: f64,
}

/// Zeeman splitting E_z = g·μ_B·B0 and Larmor frequency f_L = E_z/h.
pub fn zeeman_splitting(g: f64, b0: f64) -> Result<Splitting> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::domain(format!("g-factor must be positive, got {g}")));
    }
    if !(b0 >= 0.0) || !b0.is_finite() {
        return Err(Error::domain(format!(
            "static field B0 must be >= 0 T, got {b0}"
        )));
    }
    let energy_j = g * MU_B * b0;
    Ok(Splitting {
        energy_ev: joule_to_ev(energy_j),
        freq_hz: energy_j / H,
    })
}

/// Smallest splitting that clears the thermal energy k_B·T.
pub fn min_splitting_for_temperature(t: f64) -> Result<Splitting> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "temperature must be >= 0 K, got {t}"
        )));
    }
    let energy_j = K_B * t;
    Ok(Splitting {
        energy_ev: joule_to_ev(energy_j),
        freq_hz: energy_j / H,
    })
}

/// Time needed to rotate by `angle` at Rabi frequency `f_r`: t = angle/(2π·f_R).
pub fn rotation_duration(angle: f64, f_r: f64) -> Result<f64> {
    if !(f_r > 0.0) {
        return Err(Error::domain(format!(
            "Rabi frequency must be positive, got {f_r}"
        )));
    }
    if !(angle >= 0.0) {
        return Err(Error::domain(format!(
            "rotation angle must be >= 0, got {angle}"
        )));
    }
    Ok(angle / (2.0 * PI * f_r))
}

/// Rabi frequency of a linearly polarized drive of amplitude `b1`.
///
/// Only the co-rotating half of the linear drive contributes, hence the
/// factor 2: f_R = g·μ_B·B1/(2h).
pub fn rabi_from_field(g: f64, b1: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::domain(format!("g-factor must be positive, got {g}")));
    }
    if !(b1 >= 0.0) {
        return Err(Error::domain(format!(
            "drive amplitude must be >= 0 T, got {b1}"
        )));
    }
    Ok(g * MU_B * b1 / (2.0 * H))
}

/// Inverse of [`rabi_from_field`].
pub fn field_from_rabi(g: f64, f_r: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::domain(format!("g-factor must be positive, got {g}")));
    }
    if !(f_r >= 0.0) {
        return Err(Error::domain(format!(
            "Rabi frequency must be >= 0, got {f_r}"
        )));
    }
    Ok(2.0 * H * f_r / (g * MU_B))
}

/// A single spin in a static field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    pub g_factor: f64,
    /// Static field in tesla.
    pub b0: f64,
}

impl SpinSystem {
    pub fn new(g_factor: f64, b0: f64) -> Result<Self> {
        zeeman_splitting(g_factor, b0)?;
        Ok(Self { g_factor, b0 })
    }

    /// The spin system whose Larmor frequency is `f_l`.
    pub fn from_larmor(g_factor: f64, f_l: f64) -> Result<Self> {
        if !(f_l >= 0.0) {
            return Err(Error::domain(format!(
                "Larmor frequency must be >= 0, got {f_l}"
            )));
        }
        let b0 = f_l / gyromagnetic_ratio(g_factor);
        Self::new(g_factor, b0)
    }

    pub fn zeeman_ev(&self) -> f64 {
        joule_to_ev(self.g_factor * MU_B * self.b0)
    }

    pub fn larmor_hz(&self) -> f64 {
        self.g_factor * MU_B * self.b0 / H
    }
}

/// A resonant drive described by its Rabi frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Cyclic Rabi frequency (Hz).
    pub f_r: f64,
    /// Linear-drive amplitude (T).
    pub b1: f64,
    /// Drive phase (rad).
    #[serde(default)]
    pub phase: f64,
}

impl DriveSpec {
    pub fn from_field(g: f64, b1: f64, phase: f64) -> Result<Self> {
        Ok(Self {
            f_r: rabi_from_field(g, b1)?,
            b1,
            phase,
        })
    }

    pub fn from_rabi(g: f64, f_r: f64, phase: f64) -> Result<Self> {
        Ok(Self {
            f_r,
            b1: field_from_rabi(g, f_r)?,
            phase,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn hbar_is_h_over_two_pi() {
        assert!(rel(HBAR * 2.0 * PI, H) < 1e-12);
        assert!(rel(MU_B / E_CHARGE, MU_B_EV) < 1e-9);
    }

    #[test]
    fn zeeman_examples() {
        let s = zeeman_splitting(2.0, 2.143).unwrap();
        assert!(
            (s.energy_ev - 0.2482e-3).abs() < 0.0005e-3,
            "{}",
            s.energy_ev
        );
        assert!((s.freq_hz - 60.0e9).abs() < 0.05e9, "{}", s.freq_hz);

        let s = zeeman_splitting(2.0, 1.0).unwrap();
        assert!(rel(s.energy_ev, 1.1577e-4) < 1e-4);
        assert!(rel(s.freq_hz, 27.99e9) < 2e-4);

        let s = zeeman_splitting(2.0, 0.0).unwrap();
        assert_eq!(s.energy_ev, 0.0);
        assert_eq!(s.freq_hz, 0.0);
    }

    #[test]
    fn zeeman_domain_errors() {
        assert!(matches!(zeeman_splitting(2.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(zeeman_splitting(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(zeeman_splitting(-2.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn thermal_splitting() {
        let s = min_splitting_for_temperature(3.0).unwrap();
        assert!(rel(s.energy_ev, 0.2585e-3) < 2e-4);
        assert!(rel(s.freq_hz, 62.5e9) < 1e-3);
        let s = min_splitting_for_temperature(0.1).unwrap();
        assert!(rel(s.energy_ev, 8.617e-6) < 1e-4);
        assert!(rel(s.freq_hz, 2.084e9) < 1e-3);
        let s = min_splitting_for_temperature(0.0).unwrap();
        assert_eq!((s.energy_ev, s.freq_hz), (0.0, 0.0));
        assert!(min_splitting_for_temperature(-1.0).is_err());
    }

    #[test]
    fn rotation_durations() {
        let t = rotation_duration(PI / 2.0, 750e6).unwrap();
        assert!((t - 333.333e-12).abs() < 0.001e-12);
        let t = rotation_duration(PI / 2.0, 12e9).unwrap();
        assert!((t - 20.833e-12).abs() < 0.001e-12);
        assert_eq!(rotation_duration(0.0, 1e9).unwrap(), 0.0);
        assert!(rotation_duration(1.0, 0.0).is_err());
        assert!(rotation_duration(1.0, -5.0).is_err());
        assert_eq!(
            rotation_duration(PI, 3.3e8).unwrap(),
            2.0 * rotation_duration(PI / 2.0, 3.3e8).unwrap()
        );
    }

    #[test]
    fn rabi_field_examples() {
        assert!((rabi_from_field(2.0, 53.6e-3).unwrap() - 750e6).abs() < 1e6);
        assert!(rel(rabi_from_field(2.0, 1e-3).unwrap(), 14.0e6) < 1e-3);
        assert_eq!(rabi_from_field(2.0, 0.0).unwrap(), 0.0);
        assert!(rabi_from_field(2.0, -1.0).is_err());
    }

    #[test]
    fn spin_system_from_larmor() {
        let s = SpinSystem::from_larmor(2.0, 60e9).unwrap();
        assert!(rel(s.larmor_hz(), 60e9) < 1e-14);
        assert!((s.b0 - 2.143).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn zeeman_is_linear(g in 0.1f64..4.0, b in 0.0f64..10.0) {
            let one = zeeman_splitting(g, b).unwrap().energy_ev;
            let two = zeeman_splitting(g, 2.0 * b).unwrap().energy_ev;
            prop_assert!((two - 2.0 * one).abs() <= 1e-12 * two.abs());
        }

        #[test]
        fn field_rabi_round_trip(g in 0.1f64..4.0, b1 in 1e-6f64..1.0) {
            let back = field_from_rabi(g, rabi_from_field(g, b1).unwrap()).unwrap();
            prop_assert!(rel(back, b1) < 1e-12);
        }

        #[test]
        fn pi_takes_twice_half_pi(f in 1e3f64..1e12) {
            prop_assert_eq!(
                rotation_duration(PI, f).unwrap(),
                2.0 * rotation_duration(PI / 2.0, f).unwrap()
            );
        }
    }
}
