//! `spinsim` command-line front end.
//!
//! Exit codes: 0 on success, 1 when inputs fail validation (including a
//! stochastic run without a seed), 2 on usage errors.

mod args;
mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use serde::Deserialize;

use args::{BudgetArgs, PulseArgs, RabiArgs, ReadoutArgs, RwaArgs, SequenceRunArgs, SweepArgs};
pub use args::{Cli, Command, Format};
use spinsim_core::config::Models;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Failure of a CLI run, mapped onto an exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Usage(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
        }
    }
}

impl From<spinsim_core::Error> for CliError {
    fn from(e: spinsim_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("I/O: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Contents of a `--config` file. A bare models file is accepted as well.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub models: Option<serde_json::Value>,
    pub budget: BudgetArgs,
    pub pulse: PulseArgs,
    pub rabi: RabiArgs,
    pub rwa: RwaArgs,
    pub readout: ReadoutArgs,
    pub sweep: SweepArgs,
    pub sequence: SequenceRunArgs,
}

fn load_config(path: &std::path::Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config {} is not JSON: {e}", path.display())))?;
    if value.get("spin").is_some() {
        return Ok(RunConfig {
            models: Some(value),
            ..RunConfig::default()
        });
    }
    serde_json::from_value(value)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
}

/// Settings shared by every subcommand after merging flags and config.
pub struct Context {
    pub seed: Option<u64>,
    pub format: Format,
    pub out: PathBuf,
    pub models: Models,
    pub models_from_config: bool,
    pub config: RunConfig,
}

impl Context {
    pub fn require_seed(&self, what: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| {
            CliError::Validation(format!(
                "{what} is stochastic: pass --seed or set SPINSIM_SEED"
            ))
        })
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let models_from_config = config.models.is_some();
    let models = match &config.models {
        Some(v) => Models::from_json(&v.to_string())?,
        None => Models::bundled(),
    };
    let jobs = cli.jobs.or(config.jobs).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let ctx = Context {
        seed: cli.seed.or(config.seed),
        format: cli.format.or(config.format).unwrap_or(Format::Csv),
        out: cli
            .out
            .clone()
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
        models,
        models_from_config,
        config,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    let result = pool.install(|| commands::dispatch(&cli.command, &ctx));
    if let Err(e) = &result {
        // Failed runs are logged too; the hash covers the parsed command line.
        let attempted = serde_json::json!({ "subcommand": cli.command.name(), "argv": format!("{:?}", cli.command) });
        if let Err(log_err) = output::append_manifest(
            &ctx.out,
            cli.command.name(),
            &attempted,
            ctx.seed,
            &[],
            e.code(),
        ) {
            log::warn!("could not append to runs.log: {log_err}");
        }
    }
    result
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
