//! Readout chain: double-dot charge states, spin-to-charge conversion,
//! current pulses, TIA and threshold detection.

pub mod detect;
pub mod dqd;
pub mod tia;
pub mod tunneling;

pub use detect::{
    boxcar_noise_std, detect, expected_snr, readout_error_sweep, readout_error_sweep_with,
    Detection, SweepRow, SweepSettings,
};
pub use dqd::{charge_state, stability_diagram, ChargeState, Dot, DqdConfig};
pub use tia::{events_to_current, tia_response, TemperatureTag, TiaModel};
pub use tunneling::{
    blockade_error_rate, blockade_release_times, ero_miss_rate, ero_trace, ero_trace_with,
    sample_waiting_time, spin_blockade_trace, spin_blockade_trace_with, trro_decision,
    trro_decision_with, trro_error_probabilities, trro_error_rates, Decision, EventKind,
    EventTrace, LevelOffsets, PairState, SpinLevel, TraceEvent, TunnelSpec,
};
