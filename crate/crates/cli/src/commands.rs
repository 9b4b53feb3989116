use std::f64::consts::PI;

use serde::Serialize;
use serde_json::{json, Value};

use spinsim_core::budget::{
    budget_report, detuning_infidelity, mc_gate_infidelity, pn_to_rms_detuning, timing_infidelity,
    timing_tolerance, BudgetEntry, BudgetSource, GateNoise, PnCalibration,
};
use spinsim_core::config::BUNDLED_FIG3;
use spinsim_core::dynamics::{propagator_rwa, rabi_lineshape, rwa_phase_scan, RotatingFramePulse};
use spinsim_core::pulse::{gate_switch, synthesize_vco, SwitchSpec, VcoSpec};
use spinsim_core::readout::{
    blockade_error_rate, ero_miss_rate, readout_error_sweep, trro_error_probabilities,
    trro_error_rates, LevelOffsets, TiaModel,
};
use spinsim_core::resonance::{min_splitting_for_temperature, CODATA_2018};
use spinsim_core::sequence::{charge_path, execute, parse_sequence, validate};
use spinsim_core::stats::ProportionEstimate;

use crate::args::{
    BudgetArgs, Command, PulseArgs, RabiArgs, ReadoutArgs, ReadoutMode, RwaArgs, SequenceCommand,
    SequenceRunArgs, SweepArgs, TiaPreset,
};
use crate::output::{parameter_json, parameter_rows, Outputs};
use crate::{CliError, CliResult, Context, Format};

pub fn dispatch(cmd: &Command, ctx: &Context) -> CliResult<()> {
    match cmd {
        Command::Constants => constants(ctx),
        Command::Budget(a) => budget(a.clone().merged(&ctx.config.budget), ctx),
        Command::Pulse(a) => pulse(a.clone().merged(&ctx.config.pulse), ctx),
        Command::Rabi(a) => rabi(a.clone().merged(&ctx.config.rabi), ctx),
        Command::Rwa(a) => rwa(a.clone().merged(&ctx.config.rwa), ctx),
        Command::Readout(a) => readout(a.clone().merged(&ctx.config.readout), ctx),
        Command::Sweep(a) => sweep(a.clone().merged(&ctx.config.sweep), ctx),
        Command::Sequence(SequenceCommand::Run(a)) => {
            sequence_run(a.clone().merged(&ctx.config.sequence), ctx)
        }
    }
}

fn effective<T: Serialize>(
    subcommand: &str,
    params: &T,
    ctx: &Context,
    with_models: bool,
) -> Value {
    let mut v = json!({ "subcommand": subcommand, "params": params, "format": ctx.format });
    if with_models {
        v["models"] = serde_json::to_value(ctx.models).expect("models serialize");
    }
    v
}

fn table(ctx: &Context, name: &str, rows: &[(&str, f64)]) -> CliResult<Outputs> {
    let mut out = Outputs::new(&ctx.out)?;
    match ctx.format {
        Format::Csv => out.csv(
            &format!("{name}.csv"),
            "parameter,value",
            parameter_rows(rows),
        )?,
        Format::Json => out.json(&format!("{name}.json"), &parameter_json(name, rows))?,
    }
    for (k, v) in rows {
        println!("{k:<28} {v:e}");
    }
    Ok(out)
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn constants(ctx: &Context) -> CliResult<()> {
    let c = CODATA_2018;
    let s = min_splitting_for_temperature(3.0)?;
    let rows = [
        ("h_J_s", c.h),
        ("hbar_J_s", c.hbar),
        ("k_B_J_per_K", c.k_b),
        ("e_C", c.e_charge),
        ("mu_B_J_per_T", c.mu_b),
        ("mu_B_eV_per_T", c.mu_b_ev),
        ("splitting_3K_eV", s.energy_ev),
        ("splitting_3K_Hz", s.freq_hz),
    ];
    let out = table(ctx, "constants", &rows)?;
    out.finish(
        "constants",
        &effective("constants", &json!({}), ctx, false),
        None,
    )
}

fn budget(a: BudgetArgs, ctx: &Context) -> CliResult<()> {
    let target = a.target.unwrap_or(0.999);
    let f_r = positive("--fr", a.fr.unwrap_or(750e6))?;
    let pn = a.pn.unwrap_or(-74.0);
    let eps = a.dt_frac.unwrap_or(0.014);
    let cal = PnCalibration::reference();
    let delta_f = pn_to_rms_detuning(pn, f_r, &cal)?;
    let mut entries = vec![
        BudgetEntry::new(BudgetSource::Pn, detuning_infidelity(delta_f, f_r)?)?
            .with("pn_dbc_hz", pn)
            .with("kappa", cal.kappa)
            .with("delta_f_hz", delta_f),
        BudgetEntry::new(BudgetSource::Timing, timing_infidelity(eps)?)?
            .with("epsilon", eps)
            .with("delta_t_s", timing_tolerance(f_r, eps)?),
    ];
    if let Some(df) = a.df {
        entries.push(
            BudgetEntry::new(BudgetSource::CarrierDetuning, detuning_infidelity(df, f_r)?)?
                .with("delta_f_hz", df),
        );
    }
    if let Some(ratio) = a.rwa_ratio {
        let worst = spinsim_core::dynamics::rwa_gate_infidelity(ratio, None)?;
        entries.push(BudgetEntry::new(BudgetSource::Rwa, worst)?.with("ratio", ratio));
    }
    let report = budget_report(target, entries)?;
    let mut doc = serde_json::to_value(&report).expect("report serializes");
    let mut seed_used = None;
    if let Some(trials) = a.trials {
        let seed = ctx.require_seed("budget --trials")?;
        seed_used = Some(seed);
        let noise = GateNoise {
            pn_at_1mhz: Some(pn),
            timing_offset: eps,
            ..GateNoise::default()
        };
        let mc = mc_gate_infidelity(&noise, f_r, trials, seed)?;
        doc["monte_carlo"] = serde_json::to_value(mc).expect("estimate serializes");
    }
    let mut out = Outputs::new(&ctx.out)?;
    match ctx.format {
        Format::Json => out.json("budget.json", &doc)?,
        Format::Csv => {
            let rows = report.sources.iter().map(|s| {
                let src = serde_json::to_value(s.entry.source).expect("source serializes");
                format!(
                    "{},{:e},{:e},{}",
                    src.as_str().unwrap_or("other"),
                    s.entry.infidelity,
                    s.allocation,
                    s.overrun
                )
            });
            out.csv("budget.csv", "source,infidelity,allocation,overrun", rows)?;
            out.json("budget.json", &doc)?;
        }
    }
    for s in &report.sources {
        println!(
            "{:<18} {:e}",
            format!("{:?}", s.entry.source),
            s.entry.infidelity
        );
    }
    println!(
        "total {:e} (allowed {:e}): {}",
        report.total_infidelity,
        report.allowed_infidelity,
        if report.pass { "pass" } else { "fail" }
    );
    let params = json!({ "target": target, "fr": f_r, "pn": pn, "dt_frac": eps, "df": a.df, "rwa_ratio": a.rwa_ratio, "trials": a.trials });
    out.finish(
        "budget",
        &effective("budget", &params, ctx, false),
        seed_used,
    )
}

fn pulse(a: PulseArgs, ctx: &Context) -> CliResult<()> {
    let spec = VcoSpec {
        f_c: a.fc.unwrap_or(60e9),
        pn_at_1mhz: a.pn.unwrap_or(f64::NEG_INFINITY),
        amplitude: a.amplitude.unwrap_or(0.8),
        model_startup: a.startup.unwrap_or(false),
        ..VcoSpec::default()
    };
    let duration = positive("--duration", a.duration.unwrap_or(300e-12))?;
    let fs = positive("--fs", a.fs.unwrap_or(100.0 * spec.f_c))?;
    let sw = SwitchSpec {
        rise: a.rise.unwrap_or(0.0),
        fall: a.fall.unwrap_or(0.0),
        ..SwitchSpec::ideal(a.t_start.unwrap_or(100e-12), a.t_on.unwrap_or(20e-12))
    };
    let stochastic = spec.pn_at_1mhz > f64::NEG_INFINITY;
    let seed = if stochastic {
        Some(ctx.require_seed("pulse with phase noise")?)
    } else {
        None
    };
    let w = synthesize_vco(&spec, duration, fs, seed.unwrap_or(0))?;
    let g = gate_switch(&w, &sw)?;
    let on_samples = g.samples.iter().filter(|v| **v != 0.0).count();
    let mut meta = json!({
        "fs": fs,
        "t0": g.t0,
        "samples": g.len(),
        "unit": g.unit,
        "vco": spec,
        "switch": sw,
        "envelope_area_s": sw.envelope_area(),
        "carrier_cycles": sw.envelope_area() * spec.f_c,
        "seed": seed,
    });
    let mut out = Outputs::new(&ctx.out)?;
    match ctx.format {
        Format::Csv => {
            out.csv(
                "pulse.csv",
                "time_s,value",
                g.iter_timed().map(|(t, v)| format!("{t:e},{v:e}")),
            )?;
            out.json("pulse.json", &meta)?;
        }
        Format::Json => {
            meta["values"] = json!(g.samples);
            out.json("pulse.json", &meta)?;
        }
    }
    println!(
        "{} samples at {fs:e} Hz; {} gated samples, {:.3} carrier cycles",
        g.len(),
        on_samples,
        sw.envelope_area() * spec.f_c
    );
    let params = json!({ "vco": spec, "duration": duration, "fs": fs, "switch": sw });
    out.finish("pulse", &effective("pulse", &params, ctx, false), seed)
}

fn rabi(a: RabiArgs, ctx: &Context) -> CliResult<()> {
    let f_r = positive("--fr", a.fr.unwrap_or(750e6))?;
    let detuning = a.detuning.unwrap_or(0.0);
    let angle = a.angle.unwrap_or(PI / 2.0);
    let duration = match a.duration {
        Some(d) => d,
        None => spinsim_core::resonance::rotation_duration(angle, f_r)?,
    };
    let phase = a.phase.unwrap_or(0.0);
    let u = propagator_rwa(&RotatingFramePulse {
        f_r,
        detuning,
        phase,
        duration,
    })?;
    let rows = [
        ("f_r_hz", f_r),
        ("detuning_hz", detuning),
        ("duration_s", duration),
        ("phase_rad", phase),
        ("p_up", u.spin_up_from_down()),
        ("lineshape", rabi_lineshape(f_r, detuning, duration)),
    ];
    let out = table(ctx, "rabi", &rows)?;
    let params = json!({ "fr": f_r, "detuning": detuning, "duration": duration, "phase": phase });
    out.finish("rabi", &effective("rabi", &params, ctx, false), None)
}

/// Drive phases used for the worst-case RWA scan.
const RWA_PHASES: usize = 8;

fn rwa(a: RwaArgs, ctx: &Context) -> CliResult<()> {
    let ratio = positive("--ratio", a.ratio.unwrap_or(5.0))?;
    let phase = a.phase.unwrap_or(0.0);
    let scan = rwa_phase_scan(ratio, RWA_PHASES)?;
    let at_phase = if a.phase.is_none() {
        scan[0].1
    } else {
        spinsim_core::dynamics::rwa_gate_infidelity(ratio, Some(phase))?
    };
    let worst = scan.iter().map(|p| p.1).fold(0.0, f64::max);
    let mean = scan.iter().map(|p| p.1).sum::<f64>() / scan.len() as f64;
    let rows = [
        ("ratio", ratio),
        ("phase_rad", phase),
        ("infidelity", at_phase),
        ("fidelity", 1.0 - at_phase),
        ("mean_infidelity_over_phases", mean),
        ("worst_infidelity_over_phases", worst),
    ];
    let out = table(ctx, "rwa", &rows)?;
    let params = json!({ "ratio": ratio, "phase": phase, "phases": RWA_PHASES });
    out.finish("rwa", &effective("rwa", &params, ctx, false), None)
}

#[derive(Serialize)]
struct RateRow {
    quantity: &'static str,
    measured: f64,
    ci_low: f64,
    ci_high: f64,
    expected: f64,
    successes: usize,
    trials: usize,
}

fn rate_row(quantity: &'static str, e: ProportionEstimate, expected: f64) -> RateRow {
    RateRow {
        quantity,
        measured: e.p,
        ci_low: e.ci_low,
        ci_high: e.ci_high,
        expected,
        successes: e.successes,
        trials: e.trials,
    }
}

fn readout(a: ReadoutArgs, ctx: &Context) -> CliResult<()> {
    let seed = ctx.require_seed("readout")?;
    let mode = a.mode.unwrap_or(ReadoutMode::Trro);
    let trials = a.trials.unwrap_or(10_000);
    let ts = ctx.models.tunnel;
    let (window, rows) = match mode {
        ReadoutMode::Trro => {
            let tau = positive("--window", a.window.unwrap_or(0.3e-6))?;
            let (es, gs) = trro_error_rates(&ts, tau, trials, seed)?;
            let (p_es, p_gs) = trro_error_probabilities(&ts, tau);
            (
                tau,
                vec![
                    rate_row("error_given_es", es, p_es),
                    rate_row("error_given_gs", gs, p_gs),
                ],
            )
        }
        ReadoutMode::Ero => {
            let window = positive("--window", a.window.unwrap_or(0.2e-6))?;
            let levels =
                LevelOffsets::from_zeeman(a.mu.unwrap_or(0.0), ctx.models.spin.zeeman_ev());
            let miss = ero_miss_rate(&levels, &ts, window, trials, seed)?;
            (
                window,
                vec![rate_row(
                    "miss_given_es",
                    miss,
                    (-ts.gamma_es * window).exp(),
                )],
            )
        }
        ReadoutMode::Blockade => {
            let window = positive("--window", a.window.unwrap_or(5.0 * ts.t1))?;
            let latency = a.latency.unwrap_or(1e-6);
            let err = blockade_error_rate(ts.t1, window, latency, trials, seed)?;
            let expected = -(-latency.min(window) / ts.t1).exp_m1();
            (
                window,
                vec![rate_row("triplet_read_as_singlet", err, expected)],
            )
        }
    };
    let mut out = Outputs::new(&ctx.out)?;
    let doc =
        json!({ "mode": mode, "trials": trials, "window": window, "seed": seed, "rates": rows });
    match ctx.format {
        Format::Json => out.json("readout.json", &doc)?,
        Format::Csv => out.csv(
            "readout.csv",
            "quantity,measured,ci_low,ci_high,expected",
            rows.iter().map(|r| {
                format!(
                    "{},{:e},{:e},{:e},{:e}",
                    r.quantity, r.measured, r.ci_low, r.ci_high, r.expected
                )
            }),
        )?,
    }
    for r in &rows {
        println!(
            "{:<24} {:.6} (expected {:.6})",
            r.quantity, r.measured, r.expected
        );
    }
    let params = json!({ "mode": mode, "trials": trials, "window": window, "latency": a.latency, "mu": a.mu });
    out.finish(
        "readout",
        &effective("readout", &params, ctx, true),
        Some(seed),
    )
}

fn sweep(a: SweepArgs, ctx: &Context) -> CliResult<()> {
    let seed = ctx.require_seed("sweep")?;
    let i_peaks = a
        .i_peak
        .unwrap_or_else(|| vec![1e-9, 2e-9, 5e-9, 10e-9, 20e-9, 50e-9]);
    let windows = a
        .window
        .unwrap_or_else(|| vec![0.1e-9, 0.2e-9, 0.5e-9, 1e-9, 2e-9]);
    let trials = a.trials.unwrap_or(1000);
    let model = match a.tia {
        Some(TiaPreset::Room) => TiaModel::room_temperature(),
        Some(TiaPreset::Cryo) => TiaModel::cryogenic(),
        None => ctx.models.tia,
    };
    let rows = readout_error_sweep(&i_peaks, &windows, &model, trials, seed)?;
    let mut out = Outputs::new(&ctx.out)?;
    match ctx.format {
        Format::Csv => out.csv(
            "sweep.csv",
            "i_peak,window,error_rate,snr",
            rows.iter().map(|r| {
                format!(
                    "{:e},{:e},{:e},{:e}",
                    r.i_peak, r.window, r.error_rate, r.snr
                )
            }),
        )?,
        Format::Json => out.json(
            "sweep.json",
            &json!({ "tia": model, "trials": trials, "seed": seed, "rows": rows }),
        )?,
    }
    println!("{} cells, {} trials each", rows.len(), trials);
    let params = json!({ "i_peak": i_peaks, "window": windows, "trials": trials, "tia": model });
    out.finish(
        "sweep",
        &effective("sweep", &params, ctx, false),
        Some(seed),
    )
}

fn sequence_run(a: SequenceRunArgs, ctx: &Context) -> CliResult<()> {
    let (name, text) = match &a.file {
        Some(p) => (
            p.display().to_string(),
            std::fs::read_to_string(p)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", p.display())))?,
        ),
        None => ("fig3.seq (bundled)".to_owned(), BUNDLED_FIG3.to_owned()),
    };
    let program =
        parse_sequence(&text).map_err(|e| CliError::Validation(format!("{name}: {e}")))?;
    let diagnostics = validate(&program, &ctx.models.dqd);
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("{name}: {d}");
        }
        return Err(CliError::Validation(format!(
            "{name}: {} validation diagnostic(s)",
            diagnostics.len()
        )));
    }
    let seed = ctx.require_seed("sequence run")?;
    let shots = a.shots.unwrap_or(1000);
    let result = execute(&program, &ctx.models, shots, seed)?;
    let path: Vec<_> = charge_path(&program, &ctx.models.dqd)
        .into_iter()
        .flatten()
        .collect();
    let mut out = Outputs::new(&ctx.out)?;
    let shots_detail: Vec<Value> = result
        .records
        .iter()
        .map(|r| json!({ "shot": r.shot, "outcomes": r.outcomes }))
        .collect();
    out.json(
        "sequence.json",
        &json!({
            "program": name,
            "shots": shots,
            "seed": seed,
            "charge_path": path,
            "left": result.left,
            "right": result.right,
            "records": shots_detail,
        }),
    )?;
    let rows = result.records.iter().flat_map(|r| {
        r.timeline.iter().map(move |e| {
            format!(
                "{},{},{:e},{},{},{},{:e},{:e}",
                r.shot,
                e.step,
                e.t,
                e.point,
                e.charge_state.n_l,
                e.charge_state.n_r,
                e.p_up[0],
                e.p_up[1]
            )
        })
    });
    out.csv(
        "timeline.csv",
        "shot,step,t,point,n_l,n_r,p_up_left,p_up_right",
        rows,
    )?;
    let show = |e: Option<ProportionEstimate>| {
        e.map_or("n/a".to_owned(), |e| {
            format!("{:.4} [{:.4}, {:.4}]", e.p, e.ci_low, e.ci_high)
        })
    };
    println!("left  P(up) = {}", show(result.left));
    println!("right P(up) = {}", show(result.right));
    let params = json!({ "program": serde_json::to_value(&program).expect("program serializes"), "shots": shots });
    out.finish(
        "sequence run",
        &effective("sequence run", &params, ctx, true),
        Some(seed),
    )
}
