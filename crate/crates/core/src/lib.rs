//! Co-simulation of cryogenic control and readout electronics with
//! two-level spin dynamics.
//!
//! The crate is organised bottom-up: physical constants and Zeeman
//! arithmetic ([`resonance`]), spin propagators ([`dynamics`]), oscillator
//! and switch models ([`pulse`]), the infidelity budget ([`budget`]), the
//! readout chain ([`readout`]) and a small sequencing language
//! ([`sequence`]) that drives all of them.

// `!(x > 0.0)` is used throughout to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod budget;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod pulse;
pub mod readout;
pub mod resonance;
pub mod rng;
pub mod sequence;
pub mod spectral;
pub mod stats;
pub mod waveform;

pub use budget::{
    budget_report, detuning_infidelity, equal_allocation, mc_gate_infidelity, pn_to_rms_detuning,
    timing_infidelity, timing_tolerance, BudgetEntry, BudgetReport, BudgetSource, GateNoise,
    PnCalibration,
};
pub use config::{Models, BUNDLED_FIG3, BUNDLED_MODELS};
pub use dynamics::{
    evolve_labframe, gate_infidelity, infidelity, propagator_rwa, rabi_lineshape,
    rwa_gate_infidelity, to_rotating_frame, FidelityMetric, FidelityReport, RotatingFramePulse,
    SpinPropagator,
};
pub use error::{Error, Result};
pub use pulse::{
    drive_field, estimate_phase_noise, gate_switch, synthesize_vco, DriveConversion, DriveMode,
    SwitchSpec, VcoSpec,
};
pub use readout::{
    charge_state, detect, ero_trace, events_to_current, readout_error_sweep, spin_blockade_trace,
    tia_response, trro_decision, ChargeState, DqdConfig, EventTrace, TiaModel, TunnelSpec,
};
pub use resonance::{
    min_splitting_for_temperature, rotation_duration, zeeman_splitting, DriveSpec, SpinSystem,
    CODATA_2018,
};
pub use sequence::{execute, parse_sequence, serialize, validate, ParseError, SequenceProgram};
pub use stats::{MeanEstimate, ProportionEstimate};
pub use waveform::{Unit, Waveform};
