use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::readout::Dot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointDef {
    pub v_l: f64,
    pub v_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseAction {
    /// Carrier frequency (Hz).
    pub f: f64,
    pub duration: f64,
    pub phase: f64,
    pub target: Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    None,
    Init,
    Pulse(PulseAction),
    MeasureEro { target: Dot },
    Empty { target: Dot },
}

impl Action {
    pub fn keyword(&self) -> &'static str {
        match self {
            Action::None => "none",
            Action::Init => "init",
            Action::Pulse(_) => "pulse",
            Action::MeasureEro { .. } => "measure_ero",
            Action::Empty { .. } => "empty",
        }
    }

    pub fn target(&self) -> Option<Dot> {
        match self {
            Action::Pulse(p) => Some(p.target),
            Action::MeasureEro { target } | Action::Empty { target } => Some(*target),
            Action::None | Action::Init => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub point: String,
    pub dwell: f64,
    pub action: Action,
    /// Linear voltage ramp from the previous point, in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<f64>,
}

/// Source lines of each declaration, 1-based. Absent for programs built in code.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SourceMap {
    pub points: BTreeMap<String, usize>,
    pub steps: Vec<usize>,
}

/// A parsed control program. Equality is structural and ignores source positions.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SequenceProgram {
    pub points: BTreeMap<String, PointDef>,
    pub steps: Vec<Step>,
    #[serde(skip)]
    pub source: SourceMap,
}

impl PartialEq for SequenceProgram {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.steps == other.steps
    }
}

impl SequenceProgram {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.steps.is_empty()
    }

    pub fn step_line(&self, index: usize) -> Option<usize> {
        self.source.steps.get(index).copied()
    }
}

fn dot_name(d: Dot) -> &'static str {
    match d {
        Dot::Left => "left",
        Dot::Right => "right",
    }
}

/// Canonical text form: points in name order, then steps; every quantity in
/// base SI units written in shortest round-trip exponent notation.
pub fn serialize(program: &SequenceProgram) -> String {
    let mut out = String::new();
    for (name, p) in &program.points {
        out.push_str(&format!("point {name} vl={:e}V vr={:e}V\n", p.v_l, p.v_r));
    }
    for step in &program.steps {
        out.push_str(&format!(
            "step {} dwell={:e}s action={}",
            step.point,
            step.dwell,
            step.action.keyword()
        ));
        match step.action {
            Action::Pulse(p) => out.push_str(&format!(
                " f={:e}Hz duration={:e}s phase={:e}rad target={}",
                p.f,
                p.duration,
                p.phase,
                dot_name(p.target)
            )),
            Action::MeasureEro { target } | Action::Empty { target } => {
                out.push_str(&format!(" target={}", dot_name(target)))
            }
            Action::None | Action::Init => {}
        }
        if let Some(r) = step.ramp {
            out.push_str(&format!(" ramp={r:e}s"));
        }
        out.push('\n');
    }
    out
}
