//! Constant-interaction model of a gate-defined double quantum dot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute energy tolerance (eV) below which two configurations are
/// treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqdConfig {
    /// Charging energies (eV).
    pub e_cl: f64,
    pub e_cr: f64,
    /// Mutual charging energy (eV).
    pub e_m: f64,
    /// Lever arms (eV/V): `alpha_lr` couples the right gate to the left dot.
    pub alpha_ll: f64,
    pub alpha_lr: f64,
    pub alpha_rl: f64,
    pub alpha_rr: f64,
    pub max_occupancy: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChargeState {
    pub n_l: u32,
    pub n_r: u32,
}

impl ChargeState {
    pub const fn new(n_l: u32, n_r: u32) -> Self {
        Self { n_l, n_r }
    }

    pub fn total(self) -> u32 {
        self.n_l + self.n_r
    }

    /// Electrons moved between two configurations, counting each dot separately.
    pub fn hop_size(self, other: ChargeState) -> u32 {
        self.n_l.abs_diff(other.n_l) + self.n_r.abs_diff(other.n_r)
    }

    pub fn swapped(self) -> Self {
        Self {
            n_l: self.n_r,
            n_r: self.n_l,
        }
    }
}

impl std::fmt::Display for ChargeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.n_l, self.n_r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dot {
    Left,
    Right,
}

impl DqdConfig {
    /// Symmetric synthetic device used by the bundled fig3 program:
    /// 4 meV charging energies, 0.8 meV mutual term, 0.08 eV/V direct and
    /// 0.01 eV/V cross lever arms.
    pub fn reference() -> Self {
        Self {
            e_cl: 4e-3,
            e_cr: 4e-3,
            e_m: 0.8e-3,
            alpha_ll: 0.08,
            alpha_lr: 0.01,
            alpha_rl: 0.01,
            alpha_rr: 0.08,
            max_occupancy: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_cl > 0.0 && self.e_cr > 0.0) {
            return Err(Error::config("charging energies must be positive"));
        }
        if !(self.e_m >= 0.0 && self.e_m < self.e_cl.min(self.e_cr)) {
            return Err(Error::config(
                "mutual charging energy must satisfy 0 <= E_m < min(E_CL, E_CR)",
            ));
        }
        let arms = [self.alpha_ll, self.alpha_lr, self.alpha_rl, self.alpha_rr];
        if !arms.iter().all(|a| *a >= 0.0) {
            return Err(Error::config("lever arms must be non-negative"));
        }
        Ok(())
    }

    /// Gate-induced potentials `(u_L, u_R)` in eV.
    pub fn potentials(&self, v_l: f64, v_r: f64) -> (f64, f64) {
        (
            self.alpha_ll * v_l + self.alpha_lr * v_r,
            self.alpha_rl * v_l + self.alpha_rr * v_r,
        )
    }

    /// Gate voltages producing the potentials `(u_L, u_R)`.
    pub fn voltages_for(&self, u_l: f64, u_r: f64) -> Result<(f64, f64)> {
        let det = self.alpha_ll * self.alpha_rr - self.alpha_lr * self.alpha_rl;
        if det.abs() < 1e-30 {
            return Err(Error::config("lever-arm matrix is singular"));
        }
        Ok((
            (self.alpha_rr * u_l - self.alpha_lr * u_r) / det,
            (self.alpha_ll * u_r - self.alpha_rl * u_l) / det,
        ))
    }

    /// Electrostatic energy of `s` at the given potentials.
    pub fn energy(&self, s: ChargeState, u_l: f64, u_r: f64) -> f64 {
        let (nl, nr) = (s.n_l as f64, s.n_r as f64);
        0.5 * self.e_cl * nl * nl + 0.5 * self.e_cr * nr * nr + self.e_m * nl * nr
            - u_l * nl
            - u_r * nr
    }

    /// Electrochemical potential for adding one electron to `dot` starting
    /// from `s`, relative to the reservoir Fermi level (eV).
    pub fn addition_potential(&self, s: ChargeState, dot: Dot, v_l: f64, v_r: f64) -> f64 {
        let (u_l, u_r) = self.potentials(v_l, v_r);
        let next = match dot {
            Dot::Left => ChargeState::new(s.n_l + 1, s.n_r),
            Dot::Right => ChargeState::new(s.n_l, s.n_r + 1),
        };
        self.energy(next, u_l, u_r) - self.energy(s, u_l, u_r)
    }
}

/// Ground-state occupancy at gate voltages `(v_l, v_r)`.
pub fn charge_state(v_l: f64, v_r: f64, cfg: &DqdConfig) -> ChargeState {
    let (u_l, u_r) = cfg.potentials(v_l, v_r);
    let mut best = ChargeState::new(0, 0);
    let mut best_e = cfg.energy(best, u_l, u_r);
    // Enumerate by total occupancy, then n_L, so the first state within
    // tolerance of the minimum wins ties.
    for total in 0..=2 * cfg.max_occupancy {
        for n_l in 0..=total.min(cfg.max_occupancy) {
            let n_r = total - n_l;
            if n_r > cfg.max_occupancy {
                continue;
            }
            let s = ChargeState::new(n_l, n_r);
            let e = cfg.energy(s, u_l, u_r);
            if e < best_e - DEGENERACY_TOL {
                best = s;
                best_e = e;
            }
        }
    }
    best
}

/// Sample the stability diagram on a `nx × ny` voltage grid.
pub fn stability_diagram(
    cfg: &DqdConfig,
    vl_range: (f64, f64),
    vr_range: (f64, f64),
    nx: usize,
    ny: usize,
) -> Vec<(f64, f64, ChargeState)> {
    let step = |(a, b): (f64, f64), n: usize, i: usize| {
        if n > 1 {
            a + (b - a) * i as f64 / (n - 1) as f64
        } else {
            a
        }
    };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (vl, vr) = (step(vl_range, nx, i), step(vr_range, ny, j));
            out.push((vl, vr, charge_state(vl, vr, cfg)));
        }
    }
    out
}
