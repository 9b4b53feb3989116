//! Command-line grammar. Every subcommand parameter is optional on the
//! command line so that `--config` values can fill the gaps; flags win.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "spinsim",
    version,
    about = "Spin-qubit control and readout electronics co-simulator"
)]
pub struct Cli {
    /// Master seed for stochastic subcommands.
    #[arg(long, global = true, env = "SPINSIM_SEED")]
    pub seed: Option<u64>,

    /// Worker threads for Monte-Carlo loops; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Physical constants and the 3 K thermal splitting.
    Constants,
    /// Electronics infidelity budget for a π/2 gate.
    Budget(BudgetArgs),
    /// Gated VCO waveform.
    Pulse(PulseArgs),
    /// Rotating-frame Rabi rotation.
    Rabi(RabiArgs),
    /// Gate error from the rotating-wave approximation.
    Rwa(RwaArgs),
    /// Monte-Carlo spin-to-charge conversion statistics.
    Readout(ReadoutArgs),
    /// Readout error rate over peak current and integration window.
    Sweep(SweepArgs),
    /// Control-sequence programs.
    #[command(subcommand)]
    Sequence(SequenceCommand),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Budget(_) => "budget",
            Command::Pulse(_) => "pulse",
            Command::Rabi(_) => "rabi",
            Command::Rwa(_) => "rwa",
            Command::Readout(_) => "readout",
            Command::Sweep(_) => "sweep",
            Command::Sequence(SequenceCommand::Run(_)) => "sequence run",
        }
    }
}

/// Fill unset fields of `$a` from `$b`.
macro_rules! merge_fields {
    ($a:ident, $b:ident; $($f:ident),*) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f.clone(); } )*
    };
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetArgs {
    /// Target gate fidelity.
    #[arg(long)]
    pub target: Option<f64>,
    /// Rabi frequency (Hz).
    #[arg(long)]
    pub fr: Option<f64>,
    /// Oscillator phase noise at 1 MHz offset (dBc/Hz).
    #[arg(long, allow_hyphen_values = true)]
    pub pn: Option<f64>,
    /// Fractional pulse-duration error.
    #[arg(long = "dt-frac")]
    pub dt_frac: Option<f64>,
    /// Static carrier offset (Hz) entered as its own budget line.
    #[arg(long)]
    pub df: Option<f64>,
    /// Lab-frame f_L/f_R ratio; adds the RWA floor as a budget line.
    #[arg(long = "rwa-ratio")]
    pub rwa_ratio: Option<f64>,
    /// Monte-Carlo trials for a cross-check of the analytic total (needs a seed).
    #[arg(long)]
    pub trials: Option<usize>,
}

impl BudgetArgs {
    pub fn merged(mut self, cfg: &Self) -> Self {
        merge_fields!(self, cfg; target, fr, pn, dt_frac, df, rwa_ratio, trials);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseArgs {
    /// Carrier frequency (Hz).
    #[arg(long)]
    pub fc: Option<f64>,
    /// Phase noise at 1 MHz (dBc/Hz); omit for a clean carrier.
    #[arg(long, allow_hyphen_values = true)]
    pub pn: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Record length (s).
    #[arg(long)]
    pub duration: Option<f64>,
    /// Sample rate (Hz).
    #[arg(long)]
    pub fs: Option<f64>,
    /// Switch opening time (s).
    #[arg(long = "t-start")]
    pub t_start: Option<f64>,
    /// Commanded on-time (s).
    #[arg(long = "t-on")]
    pub t_on: Option<f64>,
    #[arg(long)]
    pub rise: Option<f64>,
    #[arg(long)]
    pub fall: Option<f64>,
    /// Model the oscillator start-up transient.
    #[arg(long)]
    pub startup: Option<bool>,
}

impl PulseArgs {
    pub fn merged(mut self, cfg: &Self) -> Self {
        merge_fields!(self, cfg; fc, pn, amplitude, duration, fs, t_start, t_on, rise, fall, startup);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiArgs {
    /// Rabi frequency (Hz).
    #[arg(long)]
    pub fr: Option<f64>,
    /// Drive detuning from the Larmor frequency (Hz).
    #[arg(long, allow_hyphen_values = true)]
    pub detuning: Option<f64>,
    /// Nominal rotation angle (rad); sets the duration if none is given.
    #[arg(long)]
    pub angle: Option<f64>,
    /// Pulse duration (s).
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
}

impl RabiArgs {
    pub fn merged(mut self, cfg: &Self) -> Self {
        merge_fields!(self, cfg; fr, detuning, angle, duration, phase);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RwaArgs {
    /// f_L/f_R ratio.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Single drive phase (rad) instead of the worst case over 8 phases.
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    /// Declare the run deterministic; no seed is needed or recorded.
    #[arg(long)]
    #[serde(skip)]
    pub seedless: bool,
}

impl RwaArgs {
    pub fn merged(mut self, cfg: &Self) -> Self {
        merge_fields!(self, cfg; ratio, phase);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutMode {
    Ero,
    Trro,
    Blockade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum TiaPreset {
    #[value(name = "300K")]
    #[serde(rename = "300K")]
    Room,
    #[value(name = "77K")]
    #[serde(rename = "77K")]
    Cryo,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutArgs {
    #[arg(long, value_enum)]
    pub mode: Option<ReadoutMode>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Measurement window or TR-RO decision time (s).
    #[arg(long)]
    pub window: Option<f64>,
    /// Blockade decision latency (s).
    #[arg(long)]
    pub latency: Option<f64>,
    /// ERO level offset from the reservoir (eV) before the Zeeman split.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
}

impl ReadoutArgs {
    pub fn merged(mut self, cfg: &Self) -> Self {
        merge_fields!(self, cfg; mode, trials, window, latency, mu);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    /// Peak currents (A), comma separated.
    #[arg(long = "i-peak", value_delimiter = ',')]
    pub i_peak: Option<Vec<f64>>,
    /// Integration windows (s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub window: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// TIA preset; overrides the models file.
    #[arg(long, value_enum)]
    pub tia: Option<TiaPreset>,
}

impl SweepArgs {
    pub fn merged(mut self, cfg: &Self) -> Self {
        merge_fields!(self, cfg; i_peak, window, trials, tia);
        self
    }
}

#[derive(Debug, Subcommand)]
pub enum SequenceCommand {
    /// Validate and execute a `.seq` program.
    Run(SequenceRunArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceRunArgs {
    /// Program file; the bundled fig3 program when omitted.
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub shots: Option<usize>,
}

impl SequenceRunArgs {
    pub fn merged(mut self, cfg: &Self) -> Self {
        merge_fields!(self, cfg; file, shots);
        self
    }
}
