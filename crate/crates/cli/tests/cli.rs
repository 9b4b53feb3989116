use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spinsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinsim"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env_remove("SPINSIM_SEED")
        .output()
        .expect("spawn spinsim")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name);
    jsonschema::validator_for(&read_json(&path)).expect("schema compiles")
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let v = schema(schema_name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn table_value(path: &Path, key: &str) -> f64 {
    csv_rows(path)
        .into_iter()
        .find(|r| r[0] == key)
        .unwrap_or_else(|| panic!("{key} missing"))[1]
        .parse()
        .unwrap()
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(spinsim(d.path(), &["constants"]).status.code(), Some(0));
    assert_eq!(
        spinsim(d.path(), &["budget", "--no-such-flag"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(spinsim(d.path(), &["teleport"]).status.code(), Some(2));
    assert_eq!(
        spinsim(d.path(), &["budget", "--fr=-1"]).status.code(),
        Some(1)
    );
    assert_eq!(spinsim(d.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_flag_prints_help_hint() {
    let d = tempfile::tempdir().unwrap();
    let out = spinsim(d.path(), &["rwa", "--bogus"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn stochastic_subcommands_require_a_seed() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["readout"][..],
        &["sweep", "--trials", "100"],
        &["sequence", "run", "--shots", "10"],
        &["pulse", "--pn", "-90"],
        &["budget", "--trials", "100"],
    ] {
        let out = spinsim(d.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("seed"),
            "{args:?}"
        );
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let d = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_spinsim"))
        .arg("--out")
        .arg(d.path())
        .args(["readout", "--trials", "500"])
        .env("SPINSIM_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let line: Value = serde_json::from_str(
        fs::read_to_string(d.path().join("runs.log"))
            .unwrap()
            .trim(),
    )
    .unwrap();
    assert_eq!(line["seed"], 11);
}

#[test]
fn flags_override_config_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"seed": 5, "rwa": {"ratio": 80}, "readout": {"trials": 300}}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();

    assert_eq!(
        spinsim(d.path(), &["--config", c, "rwa"]).status.code(),
        Some(0)
    );
    assert_eq!(table_value(&d.path().join("rwa.csv"), "ratio"), 80.0);
    assert_eq!(
        spinsim(d.path(), &["--config", c, "rwa", "--ratio", "5"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(table_value(&d.path().join("rwa.csv"), "ratio"), 5.0);

    // Seed from the config file satisfies the stochastic requirement; the flag wins when given.
    assert_eq!(
        spinsim(d.path(), &["--config", c, "--format", "json", "readout"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(read_json(&d.path().join("readout.json"))["seed"], 5);
    assert_eq!(read_json(&d.path().join("readout.json"))["trials"], 300);
    assert_eq!(
        spinsim(
            d.path(),
            &["--config", c, "--seed", "9", "--format", "json", "readout"]
        )
        .status
        .code(),
        Some(0)
    );
    assert_eq!(read_json(&d.path().join("readout.json"))["seed"], 9);
}

#[test]
fn bare_models_file_is_accepted_as_config() {
    let d = tempfile::tempdir().unwrap();
    let models = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/models.json");
    let out = spinsim(
        d.path(),
        &[
            "--seed",
            "1",
            "--config",
            models.to_str().unwrap(),
            "sequence",
            "run",
            "--shots",
            "20",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn bad_config_is_a_validation_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    fs::write(&cfg, r#"{"rwa": {"rato": 5}}"#).unwrap();
    assert_eq!(
        spinsim(d.path(), &["--config", cfg.to_str().unwrap(), "rwa"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn invalid_sequence_file_fails_validation() {
    let d = tempfile::tempdir().unwrap();
    let seq = d.path().join("bad.seq");
    fs::write(&seq, "point A vl=0V vr=0V\nstep A dwell=1us action=pulse f=60GHz duration=1ns phase=0rad target=left\n").unwrap();
    let out = spinsim(
        d.path(),
        &["--seed", "1", "sequence", "run", seq.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(1));
    fs::write(&seq, "point A vl=0V\n").unwrap();
    let out = spinsim(
        d.path(),
        &["--seed", "1", "sequence", "run", seq.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn budget_example_entries() {
    let d = tempfile::tempdir().unwrap();
    let out = spinsim(
        d.path(),
        &[
            "budget",
            "--target",
            "0.999",
            "--fr",
            "750e6",
            "--pn",
            "-74",
            "--dt-frac",
            "0.014",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&d.path().join("budget.json"));
    let sources = report["sources"].as_array().unwrap();
    assert_eq!(sources.len(), 2);
    for s in sources {
        let x = s["infidelity"].as_f64().unwrap();
        assert!((x - 125e-6).abs() / 125e-6 < 0.05, "{s}");
    }
    assert_eq!(report["pass"], true);
    assert_eq!(report["target"], 0.999);
    assert!(report["total_infidelity"].as_f64().unwrap() < 1e-3);
}

#[test]
fn rwa_ratio_five_row() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(
        spinsim(d.path(), &["rwa", "--ratio", "5", "--seedless"])
            .status
            .code(),
        Some(0)
    );
    let rows = csv_rows(&d.path().join("rwa.csv"));
    assert_eq!(rows[0], ["parameter", "value"]);
    let x = table_value(&d.path().join("rwa.csv"), "infidelity");
    // "about 99.3%" fidelity: accept one unit in the last quoted digit.
    assert!((x - 7e-3).abs() <= 1e-3, "{x}");
}

#[test]
fn constants_table() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(spinsim(d.path(), &["constants"]).status.code(), Some(0));
    let p = d.path().join("constants.csv");
    assert_eq!(table_value(&p, "h_J_s"), 6.62607015e-34);
    assert_eq!(table_value(&p, "e_C"), 1.602176634e-19);
    let f = table_value(&p, "splitting_3K_Hz");
    assert!(f > 62e9 && f < 63e9, "{f}");
}

#[test]
fn every_output_has_a_header_and_validates() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let runs: &[&[&str]] = &[
        &["--format", "json", "constants"],
        &["--format", "json", "rabi"],
        &["--format", "json", "rwa"],
        &[
            "--seed",
            "2",
            "--format",
            "json",
            "budget",
            "--trials",
            "100",
            "--df",
            "1e5",
            "--rwa-ratio",
            "80",
        ],
        &[
            "--seed",
            "2",
            "--format",
            "json",
            "pulse",
            "--pn",
            "-90",
            "--duration",
            "200e-12",
        ],
        &["--format", "csv", "pulse", "--duration", "200e-12"],
        &[
            "--seed", "2", "--format", "json", "readout", "--mode", "ero", "--trials", "500",
        ],
        &[
            "--seed", "2", "--format", "json", "readout", "--mode", "blockade", "--trials", "500",
        ],
        &[
            "--seed",
            "2",
            "--format",
            "json",
            "sweep",
            "--trials",
            "100",
            "--i-peak",
            "1e-9,5e-9",
            "--window",
            "1e-9",
        ],
        &["--seed", "2", "sequence", "run", "--shots", "20"],
    ];
    for args in runs {
        let out = spinsim(p, args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for name in ["constants.json", "rabi.json", "rwa.json"] {
        assert_valid("table.schema.json", &read_json(&p.join(name)));
    }
    assert_valid("budget.schema.json", &read_json(&p.join("budget.json")));
    assert_valid("pulse.schema.json", &read_json(&p.join("pulse.json")));
    assert_valid("readout.schema.json", &read_json(&p.join("readout.json")));
    assert_valid("sweep.schema.json", &read_json(&p.join("sweep.json")));
    assert_valid("sequence.schema.json", &read_json(&p.join("sequence.json")));

    assert_eq!(csv_rows(&p.join("pulse.csv"))[0], ["time_s", "value"]);
    assert_eq!(
        csv_rows(&p.join("timeline.csv"))[0],
        [
            "shot",
            "step",
            "t",
            "point",
            "n_l",
            "n_r",
            "p_up_left",
            "p_up_right"
        ]
    );

    let log = fs::read_to_string(p.join("runs.log")).unwrap();
    assert_eq!(log.lines().count(), runs.len());
    for line in log.lines() {
        assert_valid("manifest.schema.json", &serde_json::from_str(line).unwrap());
    }
}

#[test]
fn csv_sweep_and_readout_headers() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(
        spinsim(
            p,
            &[
                "--seed",
                "4",
                "sweep",
                "--trials",
                "100",
                "--i-peak",
                "2e-9",
                "--window",
                "1e-9,2e-9"
            ]
        )
        .status
        .code(),
        Some(0)
    );
    let rows = csv_rows(&p.join("sweep.csv"));
    assert_eq!(rows[0], ["i_peak", "window", "error_rate", "snr"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(
        spinsim(p, &["--seed", "4", "readout", "--trials", "200"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        csv_rows(&p.join("readout.csv"))[0],
        ["quantity", "measured", "ci_low", "ci_high", "expected"]
    );
}

#[test]
fn failed_runs_are_logged() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(spinsim(d.path(), &["readout"]).status.code(), Some(1));
    let line: Value = serde_json::from_str(
        fs::read_to_string(d.path().join("runs.log"))
            .unwrap()
            .trim(),
    )
    .unwrap();
    assert_valid("manifest.schema.json", &line);
    assert_eq!(line["exit_code"], 1);
    assert_eq!(line["subcommand"], "readout");
}

#[test]
fn same_config_gives_same_hash() {
    let d = tempfile::tempdir().unwrap();
    for _ in 0..2 {
        spinsim(d.path(), &["rwa", "--ratio", "10"]);
    }
    spinsim(d.path(), &["rwa", "--ratio", "11"]);
    let hashes: Vec<String> = fs::read_to_string(d.path().join("runs.log"))
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<Value>(l).unwrap()["config_hash"]
                .as_str()
                .unwrap()
                .to_owned()
        })
        .collect();
    assert_eq!(hashes[0], hashes[1]);
    assert_ne!(hashes[1], hashes[2]);
}
