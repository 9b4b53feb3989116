//! Line-oriented parser for `.seq` control programs.
//!
//! ```text
//! # comment
//! point NAME vl=<voltage> vr=<voltage>
//! step NAME dwell=<time> [action=none|init|pulse|measure_ero|empty]
//!      [f=<frequency>] [duration=<time>] [phase=<angle>] [target=left|right] [ramp=<time>]
//! ```
//! Quantities take an optional SI suffix; bare numbers are base units.

use std::collections::BTreeMap;

use super::ast::{Action, PointDef, PulseAction, SequenceProgram, SourceMap, Step};
use crate::readout::Dot;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Time,
    Voltage,
    Frequency,
    Angle,
}

impl Quantity {
    fn suffixes(self) -> &'static [(&'static str, i32)] {
        match self {
            Quantity::Time => &[("ps", -12), ("ns", -9), ("us", -6), ("ms", -3), ("s", 0)],
            Quantity::Voltage => &[("mV", -3), ("V", 0)],
            Quantity::Frequency => &[("kHz", 3), ("MHz", 6), ("GHz", 9), ("Hz", 0)],
            Quantity::Angle => &[("rad", 0)],
        }
    }

    fn expected(self) -> Vec<String> {
        let units: Vec<&str> = self.suffixes().iter().map(|s| s.0).collect();
        vec![format!("a number with optional unit {}", units.join("|"))]
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let col_of = |byte: usize| line[..byte].chars().count() + 1;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: col_of(s),
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: col_of(s),
        });
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parse a decimal literal scaled by `10^shift` with a single rounding.
fn parse_scaled(number: &str, shift: i32) -> Option<f64> {
    let valid = !number.is_empty()
        && number
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'))
        && number.chars().any(|c| c.is_ascii_digit());
    if !valid {
        return None;
    }
    let (mantissa, exp) = match number.find(['e', 'E']) {
        Some(i) => (&number[..i], number[i + 1..].parse::<i32>().ok()?),
        None => (number, 0),
    };
    if mantissa.is_empty() || !mantissa.chars().any(|c| c.is_ascii_digit()) {
        return None;
    }
    let total = exp.checked_add(shift)?;
    let v: f64 = format!("{mantissa}e{total}").parse().ok()?;
    v.is_finite().then_some(v)
}

fn parse_quantity(value: &str, q: Quantity) -> Option<f64> {
    for (suffix, shift) in q.suffixes() {
        if let Some(number) = value.strip_suffix(suffix) {
            if let Some(v) = parse_scaled(number, *shift) {
                return Some(v);
            }
        }
    }
    parse_scaled(value, 0)
}

struct LineCtx {
    line: usize,
}

impl LineCtx {
    fn err(&self, column: usize, message: impl Into<String>, expected: Vec<String>) -> ParseError {
        ParseError {
            line: self.line,
            column,
            message: message.into(),
            expected,
        }
    }
}

struct Field<'a> {
    key: &'a str,
    value: &'a str,
    column: usize,
    value_column: usize,
}

fn split_fields<'a>(
    ctx: &LineCtx,
    toks: &[Token<'a>],
    allowed: &[&str],
) -> Result<Vec<Field<'a>>, ParseError> {
    let mut seen: Vec<&str> = Vec::new();
    let mut out = Vec::new();
    for t in toks {
        let Some((key, value)) = t.text.split_once('=') else {
            return Err(ctx.err(
                t.column,
                format!("expected key=value, found '{}'", t.text),
                vec!["key=value".into()],
            ));
        };
        if !allowed.contains(&key) {
            return Err(ctx.err(
                t.column,
                format!("unknown field '{key}'"),
                allowed.iter().map(|s| s.to_string()).collect(),
            ));
        }
        if seen.contains(&key) {
            return Err(ctx.err(t.column, format!("duplicate field '{key}'"), vec![]));
        }
        seen.push(key);
        let value_column = t.column + key.chars().count() + 1;
        if value.is_empty() {
            return Err(ctx.err(
                value_column,
                format!("field '{key}' has no value"),
                vec!["a value".into()],
            ));
        }
        out.push(Field {
            key,
            value,
            column: t.column,
            value_column,
        });
    }
    Ok(out)
}

fn quantity(ctx: &LineCtx, f: &Field<'_>, q: Quantity) -> Result<f64, ParseError> {
    parse_quantity(f.value, q).ok_or_else(|| {
        ctx.err(
            f.value_column,
            format!("invalid value '{}' for '{}'", f.value, f.key),
            q.expected(),
        )
    })
}

fn dot(ctx: &LineCtx, f: &Field<'_>) -> Result<Dot, ParseError> {
    match f.value {
        "left" => Ok(Dot::Left),
        "right" => Ok(Dot::Right),
        other => Err(ctx.err(
            f.value_column,
            format!("invalid target '{other}'"),
            vec!["left".into(), "right".into()],
        )),
    }
}

fn take<'f, 'a>(fields: &'f [Field<'a>], key: &str) -> Option<&'f Field<'a>> {
    fields.iter().find(|f| f.key == key)
}

const STEP_FIELDS: [&str; 7] = [
    "dwell", "action", "f", "duration", "phase", "target", "ramp",
];

fn parse_step(
    ctx: &LineCtx,
    kw_column: usize,
    rest: &[Token<'_>],
) -> Result<(Step, usize), ParseError> {
    let Some(name) = rest.first() else {
        return Err(ctx.err(
            kw_column + 4,
            "missing point name after 'step'",
            vec!["point name".into()],
        ));
    };
    if !is_name(name.text) {
        return Err(ctx.err(
            name.column,
            format!("invalid point name '{}'", name.text),
            vec!["identifier".into()],
        ));
    }
    let fields = split_fields(ctx, &rest[1..], &STEP_FIELDS)?;
    let dwell_field = take(&fields, "dwell").ok_or_else(|| {
        ctx.err(
            kw_column,
            "step is missing 'dwell'",
            vec!["dwell=<time>".into()],
        )
    })?;
    let dwell = quantity(ctx, dwell_field, Quantity::Time)?;
    if dwell < 0.0 {
        return Err(ctx.err(
            dwell_field.value_column,
            "dwell must be non-negative",
            vec![],
        ));
    }
    let ramp = match take(&fields, "ramp") {
        Some(f) => {
            let r = quantity(ctx, f, Quantity::Time)?;
            if r < 0.0 {
                return Err(ctx.err(f.value_column, "ramp must be non-negative", vec![]));
            }
            Some(r)
        }
        None => None,
    };
    let action_field = take(&fields, "action");
    let keyword = action_field.map_or("none", |f| f.value);
    let allowed_extra: &[&str] = match keyword {
        "none" | "init" => &[],
        "pulse" => &["f", "duration", "phase", "target"],
        "measure_ero" | "empty" => &["target"],
        other => {
            let col = action_field.map_or(kw_column, |f| f.value_column);
            return Err(ctx.err(
                col,
                format!("unknown action '{other}'"),
                ["none", "init", "pulse", "measure_ero", "empty"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            ));
        }
    };
    for f in &fields {
        let general = matches!(f.key, "dwell" | "action" | "ramp");
        if !general && !allowed_extra.contains(&f.key) {
            return Err(ctx.err(
                f.column,
                format!("field '{}' does not apply to action '{keyword}'", f.key),
                vec![],
            ));
        }
    }
    let require = |key: &str, hint: &str| {
        take(&fields, key).ok_or_else(|| {
            ctx.err(
                kw_column,
                format!("action '{keyword}' needs '{key}'"),
                vec![hint.into()],
            )
        })
    };
    let action = match keyword {
        "none" => Action::None,
        "init" => Action::Init,
        "pulse" => {
            let f = quantity(ctx, require("f", "f=<frequency>")?, Quantity::Frequency)?;
            let dur_field = require("duration", "duration=<time>")?;
            let duration = quantity(ctx, dur_field, Quantity::Time)?;
            if !(duration > 0.0) {
                return Err(ctx.err(
                    dur_field.value_column,
                    "pulse duration must be positive",
                    vec![],
                ));
            }
            let phase = match take(&fields, "phase") {
                Some(p) => quantity(ctx, p, Quantity::Angle)?,
                None => 0.0,
            };
            let target = dot(ctx, require("target", "target=left|right")?)?;
            Action::Pulse(PulseAction {
                f,
                duration,
                phase,
                target,
            })
        }
        "measure_ero" => Action::MeasureEro {
            target: dot(ctx, require("target", "target=left|right")?)?,
        },
        _ => Action::Empty {
            target: dot(ctx, require("target", "target=left|right")?)?,
        },
    };
    Ok((
        Step {
            point: name.text.to_owned(),
            dwell,
            action,
            ramp,
        },
        name.column,
    ))
}

fn parse_point(
    ctx: &LineCtx,
    kw_column: usize,
    rest: &[Token<'_>],
) -> Result<(String, PointDef, usize), ParseError> {
    let Some(name) = rest.first() else {
        return Err(ctx.err(
            kw_column + 5,
            "missing name after 'point'",
            vec!["point name".into()],
        ));
    };
    if !is_name(name.text) {
        return Err(ctx.err(
            name.column,
            format!("invalid point name '{}'", name.text),
            vec!["identifier".into()],
        ));
    }
    let fields = split_fields(ctx, &rest[1..], &["vl", "vr"])?;
    let get = |key: &str| -> Result<f64, ParseError> {
        let f = take(&fields, key).ok_or_else(|| {
            ctx.err(
                kw_column,
                format!("point is missing '{key}'"),
                vec![format!("{key}=<voltage>")],
            )
        })?;
        quantity(ctx, f, Quantity::Voltage)
    };
    Ok((
        name.text.to_owned(),
        PointDef {
            v_l: get("vl")?,
            v_r: get("vr")?,
        },
        name.column,
    ))
}

/// Parse program text. Undeclared or duplicate points are reported at the
/// offending token.
pub fn parse_sequence(text: &str) -> Result<SequenceProgram, ParseError> {
    let mut points = BTreeMap::new();
    let mut source = SourceMap::default();
    let mut steps = Vec::new();
    let mut references = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let ctx = LineCtx { line: idx + 1 };
        let toks = tokens(strip_comment(raw));
        let Some(first) = toks.first() else { continue };
        match first.text {
            "point" => {
                let (name, def, column) = parse_point(&ctx, first.column, &toks[1..])?;
                if points.contains_key(&name) {
                    return Err(ctx.err(column, format!("duplicate point '{name}'"), vec![]));
                }
                points.insert(name.clone(), def);
                source.points.insert(name, ctx.line);
            }
            "step" => {
                let (step, column) = parse_step(&ctx, first.column, &toks[1..])?;
                references.push((step.point.clone(), ctx.line, column));
                source.steps.push(ctx.line);
                steps.push(step);
            }
            other => {
                return Err(ctx.err(
                    first.column,
                    format!("unknown keyword '{other}'"),
                    vec!["point".into(), "step".into(), "# comment".into()],
                ))
            }
        }
    }
    for (name, line, column) in references {
        if !points.contains_key(&name) {
            return Err(ParseError {
                line,
                column,
                message: format!("undeclared point '{name}'"),
                expected: vec![],
            });
        }
    }
    Ok(SequenceProgram {
        points,
        steps,
        source,
    })
}

/// Parse raw bytes, rejecting invalid UTF-8 with its position.
pub fn parse_sequence_bytes(bytes: &[u8]) -> Result<SequenceProgram, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_sequence(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = valid.iter().filter(|b| **b == b'\n').count() + 1;
            let line_start = valid.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
            let column = String::from_utf8_lossy(&valid[line_start..])
                .chars()
                .count()
                + 1;
            Err(ParseError {
                line,
                column,
                message: "invalid UTF-8".into(),
                expected: vec![],
            })
        }
    }
}
