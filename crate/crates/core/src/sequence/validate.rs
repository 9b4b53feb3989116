use serde::{Deserialize, Serialize};

use super::ast::{Action, SequenceProgram};
use crate::readout::{charge_state, ChargeState, Dot, DqdConfig};

/// Samples used to follow a voltage ramp across the stability diagram.
const RAMP_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Index of the offending step.
    pub step: usize,
    /// Source line, when the program came from text.
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "step {} (line {l}): {}", self.step, self.message),
            None => write!(f, "step {}: {}", self.step, self.message),
        }
    }
}

fn occupancy(s: ChargeState, d: Dot) -> u32 {
    match d {
        Dot::Left => s.n_l,
        Dot::Right => s.n_r,
    }
}

fn other(d: Dot) -> Dot {
    match d {
        Dot::Left => Dot::Right,
        Dot::Right => Dot::Left,
    }
}

/// Charge state at every step, or `None` for steps naming an unknown point.
pub fn charge_path(program: &SequenceProgram, cfg: &DqdConfig) -> Vec<Option<ChargeState>> {
    program
        .steps
        .iter()
        .map(|s| {
            program
                .points
                .get(&s.point)
                .map(|p| charge_state(p.v_l, p.v_r, cfg))
        })
        .collect()
}

/// Check the program against the device's stability diagram.
pub fn validate(program: &SequenceProgram, cfg: &DqdConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |step: usize, message: String| {
        out.push(Diagnostic {
            step,
            line: program.step_line(step),
            message,
        });
    };
    if let Err(e) = cfg.validate() {
        push(0, e.to_string());
        return out;
    }
    let path = charge_path(program, cfg);
    let mut prev: Option<(ChargeState, (f64, f64))> = None;
    for (i, step) in program.steps.iter().enumerate() {
        let Some(state) = path[i] else {
            push(i, format!("undeclared point '{}'", step.point));
            prev = None;
            continue;
        };
        let point = program.points[&step.point];
        let here = (point.v_l, point.v_r);
        if let Some((before, from)) = prev {
            let hops: Vec<(ChargeState, ChargeState)> = match step.ramp {
                Some(_) => {
                    let mut seq = vec![before];
                    for k in 1..=RAMP_SAMPLES {
                        let x = k as f64 / RAMP_SAMPLES as f64;
                        let v_l = from.0 + (here.0 - from.0) * x;
                        let v_r = from.1 + (here.1 - from.1) * x;
                        seq.push(charge_state(v_l, v_r, cfg));
                    }
                    seq.windows(2).map(|w| (w[0], w[1])).collect()
                }
                None => vec![(before, state)],
            };
            for (a, b) in hops {
                if a.hop_size(b) > 1 {
                    push(i, format!("non-adjacent charge transition {a} -> {b}"));
                }
            }
        }
        match step.action {
            Action::MeasureEro { target } => {
                let ok = match prev {
                    Some((before, _)) => {
                        occupancy(before, target) == 1
                            && occupancy(state, target) <= 1
                            && occupancy(before, other(target)) == occupancy(state, other(target))
                    }
                    None => false,
                };
                if !ok {
                    push(
                        i,
                        format!("measure_ero on the {target:?} dot outside its readout region (at {state})")
                            .to_lowercase(),
                    );
                }
            }
            Action::Empty { target } if occupancy(state, target) != 0 => {
                push(
                    i,
                    format!(
                        "empty leaves {} electron(s) in the target dot at {state}",
                        occupancy(state, target)
                    ),
                );
            }
            Action::Pulse(p) => {
                if occupancy(state, p.target) != 1 {
                    push(
                        i,
                        format!(
                            "pulse targets a dot holding {} electrons at {state}",
                            occupancy(state, p.target)
                        ),
                    );
                }
                if p.duration > step.dwell {
                    push(i, "pulse duration exceeds the dwell time".into());
                }
            }
            _ => {}
        }
        prev = Some((state, here));
    }
    out
}
