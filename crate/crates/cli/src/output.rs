//! Output files and the `runs.log` provenance manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{CliResult, EXIT_OK};

pub const MANIFEST: &str = "runs.log";

/// Files written by one run, relative to the output directory.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn text(&mut self, name: &str, body: &str) -> CliResult<()> {
        fs::write(self.dir.join(name), body)?;
        self.written.push(name.to_owned());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut body = serde_json::to_string_pretty(value).expect("outputs serialize");
        body.push('\n');
        self.text(name, &body)
    }

    /// CSV with the given header; each row is already formatted.
    pub fn csv(
        &mut self,
        name: &str,
        header: &str,
        rows: impl IntoIterator<Item = String>,
    ) -> CliResult<()> {
        let mut body = String::from(header);
        body.push('\n');
        for r in rows {
            body.push_str(&r);
            body.push('\n');
        }
        self.text(name, &body)
    }

    /// Append the provenance line for this run.
    pub fn finish(
        self,
        subcommand: &str,
        effective_config: &serde_json::Value,
        seed: Option<u64>,
    ) -> CliResult<()> {
        append_manifest(
            &self.dir,
            subcommand,
            effective_config,
            seed,
            &self.written,
            EXIT_OK,
        )
    }
}

/// SHA-256 of the compact JSON form of `config`.
pub fn config_hash(config: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// One `runs.log` line: subcommand, config hash, seed, crate versions, outputs, exit code.
pub fn append_manifest(
    dir: &Path,
    subcommand: &str,
    config: &serde_json::Value,
    seed: Option<u64>,
    outputs: &[String],
    exit_code: i32,
) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    let line = serde_json::json!({
        "subcommand": subcommand,
        "config_hash": config_hash(config),
        "seed": seed,
        "versions": {
            "spinsim-cli": env!("CARGO_PKG_VERSION"),
            "spinsim-core": spinsim_core::VERSION,
        },
        "outputs": outputs,
        "exit_code": exit_code,
    });
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(dir.join(MANIFEST))?;
    writeln!(f, "{line}")?;
    Ok(())
}

/// `parameter,value` rows.
pub fn parameter_rows(rows: &[(&str, f64)]) -> Vec<String> {
    rows.iter().map(|(k, v)| format!("{k},{v:e}")).collect()
}

/// `{"parameters": [{"parameter": .., "value": ..}]}` form of a parameter table.
pub fn parameter_json(subcommand: &str, rows: &[(&str, f64)]) -> serde_json::Value {
    let params: Vec<serde_json::Value> = rows
        .iter()
        .map(|(k, v)| serde_json::json!({ "parameter": k, "value": v }))
        .collect();
    serde_json::json!({ "subcommand": subcommand, "parameters": params })
}
