//! Stochastic spin-to-charge conversion: energy-selective readout,
//! tunnel-rate-selective readout and Pauli spin blockade.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, trial_rng, SimRng};
use crate::stats::ProportionEstimate;

/// Tunnel rates (Hz) and relaxation time (s).
///
/// The defaults are synthetic placeholders: 10 MHz out of the excited
/// state, 10 kHz out of the ground state, 10 MHz reload, 1 ms T1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelSpec {
    pub gamma_es: f64,
    pub gamma_gs: f64,
    pub gamma_in: f64,
    pub t1: f64,
}

impl Default for TunnelSpec {
    fn default() -> Self {
        Self {
            gamma_es: 10e6,
            gamma_gs: 10e3,
            gamma_in: 10e6,
            t1: 1e-3,
        }
    }
}

impl TunnelSpec {
    pub fn validate(&self) -> Result<()> {
        let rates = [self.gamma_es, self.gamma_gs, self.gamma_in];
        if !rates.iter().all(|r| *r >= 0.0 && r.is_finite()) {
            return Err(Error::config(
                "tunnel rates must be finite and non-negative",
            ));
        }
        if !(self.t1 > 0.0) {
            return Err(Error::config("T1 must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinLevel {
    #[serde(rename = "ES")]
    Excited,
    #[serde(rename = "GS")]
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairState {
    #[serde(rename = "S")]
    Singlet,
    #[serde(rename = "T0")]
    Triplet0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "ES")]
    Excited,
    #[serde(rename = "GS")]
    Ground,
    #[serde(rename = "S")]
    Singlet,
    #[serde(rename = "T")]
    Triplet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TunnelOut,
    TunnelIn,
    Interdot,
    BlockedRelease,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTrace {
    pub events: Vec<TraceEvent>,
    /// Measurement window length (s); every event lies in `[0, window]`.
    pub window: f64,
    pub decision: Decision,
}

impl EventTrace {
    pub fn first(&self, kind: EventKind) -> Option<f64> {
        self.events.iter().find(|e| e.kind == kind).map(|e| e.time)
    }
}

fn waiting_time(rate: f64, rng: &mut SimRng) -> f64 {
    sample_waiting_time(rate, rng)
}

fn check_window(window: f64) -> Result<()> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::domain(format!(
            "measurement window must be positive, got {window}"
        )));
    }
    Ok(())
}

/// Level energies of the two spin states relative to the reservoir
/// electrochemical potential (eV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelOffsets {
    pub excited: f64,
    pub ground: f64,
}

impl LevelOffsets {
    /// Levels split symmetrically by the Zeeman energy around `mu`.
    pub fn from_zeeman(mu: f64, zeeman_ev: f64) -> Self {
        Self {
            excited: mu + zeeman_ev / 2.0,
            ground: mu - zeeman_ev / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ground < 0.0) {
            return Err(Error::config(format!(
                "ERO bias violated: need E_GS < mu_res, got E_GS - mu_res = {:.4e} eV",
                self.ground
            )));
        }
        if !(self.excited > 0.0) {
            return Err(Error::config(format!(
                "ERO bias violated: need mu_res < E_ES, got E_ES - mu_res = {:.4e} eV",
                self.excited
            )));
        }
        Ok(())
    }
}

/// Energy-selective readout with an explicit RNG.
pub fn ero_trace_with(
    levels: &LevelOffsets,
    ts: &TunnelSpec,
    spin: SpinLevel,
    window: f64,
    rng: &mut SimRng,
) -> Result<EventTrace> {
    levels.validate()?;
    ts.validate()?;
    check_window(window)?;
    let mut events = Vec::new();
    if spin == SpinLevel::Excited {
        let t_out = waiting_time(ts.gamma_es, rng);
        if t_out <= window {
            events.push(TraceEvent {
                time: t_out,
                kind: EventKind::TunnelOut,
            });
            // The reloaded electron sits in the ground state and stays put.
            let t_in = t_out + waiting_time(ts.gamma_in, rng);
            if t_in <= window && t_in > t_out {
                events.push(TraceEvent {
                    time: t_in,
                    kind: EventKind::TunnelIn,
                });
            }
        }
    }
    let decision = if events.is_empty() {
        Decision::Ground
    } else {
        Decision::Excited
    };
    Ok(EventTrace {
        events,
        window,
        decision,
    })
}

pub fn ero_trace(
    levels: &LevelOffsets,
    ts: &TunnelSpec,
    spin: SpinLevel,
    window: f64,
    seed: u64,
) -> Result<EventTrace> {
    ero_trace_with(levels, ts, spin, window, &mut rng_from_seed(seed))
}

/// Tunnel-rate-selective readout: ES iff a tunnel event happens by `tau`.
pub fn trro_decision_with(
    ts: &TunnelSpec,
    tau: f64,
    spin: SpinLevel,
    rng: &mut SimRng,
) -> Result<Decision> {
    ts.validate()?;
    check_window(tau)?;
    let rate = match spin {
        SpinLevel::Excited => ts.gamma_es,
        SpinLevel::Ground => ts.gamma_gs,
    };
    Ok(if waiting_time(rate, rng) <= tau {
        Decision::Excited
    } else {
        Decision::Ground
    })
}

pub fn trro_decision(ts: &TunnelSpec, tau: f64, spin: SpinLevel, seed: u64) -> Result<Decision> {
    trro_decision_with(ts, tau, spin, &mut rng_from_seed(seed))
}

/// Closed-form TR-RO error probabilities `(P(err|ES), P(err|GS))`.
pub fn trro_error_probabilities(ts: &TunnelSpec, tau: f64) -> (f64, f64) {
    ((-ts.gamma_es * tau).exp(), -(-ts.gamma_gs * tau).exp_m1())
}

/// Pauli spin blockade: the singlet moves to (0,2) at once, the triplet is
/// blocked until it relaxes. The decision is singlet iff the charge
/// transition is seen before `latency`.
pub fn spin_blockade_trace_with(
    state: PairState,
    window: f64,
    t1: f64,
    latency: f64,
    rng: &mut SimRng,
) -> Result<EventTrace> {
    check_window(window)?;
    if !(t1 > 0.0) {
        return Err(Error::domain(format!("T1 must be positive, got {t1}")));
    }
    if !(latency >= 0.0) {
        return Err(Error::domain(format!(
            "decision latency must be non-negative, got {latency}"
        )));
    }
    let event = match state {
        PairState::Singlet => Some(TraceEvent {
            time: 0.0,
            kind: EventKind::Interdot,
        }),
        PairState::Triplet0 => {
            let t = waiting_time(1.0 / t1, rng);
            (t <= window).then_some(TraceEvent {
                time: t,
                kind: EventKind::BlockedRelease,
            })
        }
    };
    let decision = match event {
        Some(e) if e.time <= latency => Decision::Singlet,
        _ => Decision::Triplet,
    };
    Ok(EventTrace {
        events: event.into_iter().collect(),
        window,
        decision,
    })
}

pub fn spin_blockade_trace(
    state: PairState,
    window: f64,
    t1: f64,
    latency: f64,
    seed: u64,
) -> Result<EventTrace> {
    spin_blockade_trace_with(state, window, t1, latency, &mut rng_from_seed(seed))
}

fn count_parallel<F>(trials: usize, seed: u64, f: F) -> Result<ProportionEstimate>
where
    F: Fn(&mut SimRng) -> Result<bool> + Sync,
{
    let hits: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|i| f(&mut trial_rng(seed, i)))
        .collect::<Result<_>>()?;
    Ok(ProportionEstimate::new(
        hits.iter().filter(|h| **h).count(),
        trials,
    ))
}

/// Monte-Carlo rate of excited spins read as ground by ERO.
pub fn ero_miss_rate(
    levels: &LevelOffsets,
    ts: &TunnelSpec,
    window: f64,
    trials: usize,
    seed: u64,
) -> Result<ProportionEstimate> {
    count_parallel(trials, seed, |rng| {
        Ok(
            ero_trace_with(levels, ts, SpinLevel::Excited, window, rng)?.decision
                == Decision::Ground,
        )
    })
}

/// Per-class TR-RO error rates `(ES read as GS, GS read as ES)`.
pub fn trro_error_rates(
    ts: &TunnelSpec,
    tau: f64,
    trials: usize,
    seed: u64,
) -> Result<(ProportionEstimate, ProportionEstimate)> {
    let es = count_parallel(trials, seed, |rng| {
        Ok(trro_decision_with(ts, tau, SpinLevel::Excited, rng)? == Decision::Ground)
    })?;
    let gs = count_parallel(trials, seed ^ 0x5851_f42d_4c95_7f2d, |rng| {
        Ok(trro_decision_with(ts, tau, SpinLevel::Ground, rng)? == Decision::Excited)
    })?;
    Ok((es, gs))
}

/// Rate at which a blocked triplet is read as a singlet: its release lands
/// before the decision latency.
pub fn blockade_error_rate(
    t1: f64,
    window: f64,
    latency: f64,
    trials: usize,
    seed: u64,
) -> Result<ProportionEstimate> {
    count_parallel(trials, seed, |rng| {
        Ok(
            spin_blockade_trace_with(PairState::Triplet0, window, t1, latency, rng)?.decision
                == Decision::Singlet,
        )
    })
}

/// Triplet release times observed within `window` over `trials` shots.
pub fn blockade_release_times(t1: f64, window: f64, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let times: Vec<Option<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let trace = spin_blockade_trace_with(
                PairState::Triplet0,
                window,
                t1,
                0.0,
                &mut trial_rng(seed, i),
            )?;
            Ok(trace.first(EventKind::BlockedRelease))
        })
        .collect::<Result<_>>()?;
    Ok(times.into_iter().flatten().collect())
}

/// Exponential waiting time at `rate`; a zero rate never fires.
pub fn sample_waiting_time<R: Rng>(rate: f64, rng: &mut R) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    Exp::new(rate).expect("positive rate").sample(rng)
}
