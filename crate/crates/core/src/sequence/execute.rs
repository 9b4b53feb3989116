use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ast::{Action, SequenceProgram};
use super::validate::{charge_path, validate};
use crate::config::Models;
use crate::dynamics::{propagator_rwa, RotatingFramePulse};
use crate::error::{Error, Result};
use crate::readout::{
    ero_trace_with, ChargeState, Decision, Dot, LevelOffsets, SpinLevel, TraceEvent,
};
use crate::rng::trial_rng;
use crate::stats::ProportionEstimate;

type Spinor = [Complex64; 2];

const DOWN: Spinor = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
const UP: Spinor = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];

fn p_up(s: &Spinor) -> f64 {
    s[0].norm_sqr()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    /// Time at which the step's dwell starts (s).
    pub t: f64,
    pub step: usize,
    pub point: String,
    pub charge_state: ChargeState,
    /// Spin-up probabilities `[left, right]` at the end of the step.
    pub p_up: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub step: usize,
    pub target: Dot,
    pub spin_up: bool,
    pub events: Vec<TraceEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub shot: usize,
    pub timeline: Vec<TimelineEntry>,
    pub outcomes: Vec<MeasurementOutcome>,
}

impl ExecutionRecord {
    /// Last ERO outcome for `dot` in this shot.
    pub fn last_outcome(&self, dot: Dot) -> Option<bool> {
        self.outcomes
            .iter()
            .rev()
            .find(|o| o.target == dot)
            .map(|o| o.spin_up)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub shots: usize,
    pub seed: u64,
    pub left: Option<ProportionEstimate>,
    pub right: Option<ProportionEstimate>,
    pub records: Vec<ExecutionRecord>,
}

fn slot(d: Dot) -> usize {
    match d {
        Dot::Left => 0,
        Dot::Right => 1,
    }
}

fn run_shot(
    program: &SequenceProgram,
    models: &Models,
    path: &[ChargeState],
    shot: usize,
    seed: u64,
) -> Result<ExecutionRecord> {
    let mut rng = trial_rng(seed, shot as u64);
    let mut spins = [DOWN, DOWN];
    let mut t = 0.0;
    let f_l = models.spin.larmor_hz();
    let zeeman = models.spin.zeeman_ev();
    let mut timeline = Vec::with_capacity(program.steps.len());
    let mut outcomes = Vec::new();
    for (i, step) in program.steps.iter().enumerate() {
        t += step.ramp.unwrap_or(0.0);
        let start = t;
        let point = program.points[&step.point];
        match step.action {
            Action::None => {}
            Action::Init => spins = [DOWN, DOWN],
            Action::Pulse(p) => {
                let u = propagator_rwa(&RotatingFramePulse {
                    f_r: models.drive.f_r,
                    detuning: p.f - f_l,
                    phase: p.phase + models.drive.phase,
                    duration: p.duration,
                })?;
                let s = &mut spins[slot(p.target)];
                *s = u.apply(*s);
            }
            Action::MeasureEro { target } => {
                let s = &mut spins[slot(target)];
                let up = rng.random::<f64>() < p_up(s);
                // Level of the measured electron relative to the reservoir.
                let mut without = path[i];
                match target {
                    Dot::Left => without.n_l = 0,
                    Dot::Right => without.n_r = 0,
                }
                let mu = models
                    .dqd
                    .addition_potential(without, target, point.v_l, point.v_r);
                let levels = LevelOffsets::from_zeeman(mu, zeeman);
                let level = if up {
                    SpinLevel::Excited
                } else {
                    SpinLevel::Ground
                };
                let trace = ero_trace_with(&levels, &models.tunnel, level, step.dwell, &mut rng)?;
                let spin_up = trace.decision == Decision::Excited;
                // Projection, then a ground-state reload after any tunnel-out.
                *s = if up && !spin_up { UP } else { DOWN };
                outcomes.push(MeasurementOutcome {
                    step: i,
                    target,
                    spin_up,
                    events: trace.events,
                });
            }
            Action::Empty { target } => spins[slot(target)] = DOWN,
        }
        t += step.dwell;
        timeline.push(TimelineEntry {
            t: start,
            step: i,
            point: step.point.clone(),
            charge_state: path[i],
            p_up: [p_up(&spins[0]), p_up(&spins[1])],
        });
    }
    Ok(ExecutionRecord {
        shot,
        timeline,
        outcomes,
    })
}

/// Run `shots` independent shots. Shot `k` draws from the stream `(seed, k)`.
pub fn execute(
    program: &SequenceProgram,
    models: &Models,
    shots: usize,
    seed: u64,
) -> Result<ExecutionResult> {
    models.validate()?;
    if shots == 0 {
        return Err(Error::domain("execution needs at least one shot"));
    }
    let diagnostics = validate(program, &models.dqd);
    if !diagnostics.is_empty() {
        return Err(Error::Validation(
            diagnostics.iter().map(|d| d.to_string()).collect(),
        ));
    }
    let path: Vec<ChargeState> = charge_path(program, &models.dqd)
        .into_iter()
        .map(|s| s.expect("validated"))
        .collect();
    let records: Vec<ExecutionRecord> = (0..shots)
        .into_par_iter()
        .map(|k| run_shot(program, models, &path, k, seed))
        .collect::<Result<_>>()?;
    let estimate = |dot: Dot| {
        let outcomes: Vec<bool> = records.iter().filter_map(|r| r.last_outcome(dot)).collect();
        (!outcomes.is_empty()).then(|| {
            ProportionEstimate::new(outcomes.iter().filter(|u| **u).count(), outcomes.len())
        })
    };
    Ok(ExecutionResult {
        shots,
        seed,
        left: estimate(Dot::Left),
        right: estimate(Dot::Right),
        records,
    })
}
