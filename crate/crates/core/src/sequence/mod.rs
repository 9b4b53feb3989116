//! Declarative control sequences over the double-dot device: parsing,
//! canonical serialization, stability-diagram validation and execution.

mod ast;
mod execute;
mod parser;
mod validate;

pub use ast::{serialize, Action, PointDef, PulseAction, SequenceProgram, SourceMap, Step};
pub use execute::{execute, ExecutionRecord, ExecutionResult, MeasurementOutcome, TimelineEntry};
pub use parser::{parse_sequence, parse_sequence_bytes, ParseError};
pub use validate::{charge_path, validate, Diagnostic};
