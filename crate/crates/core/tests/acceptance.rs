//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{binomial_sigma, exp_cdf, ks_critical_5pct, ks_statistic, rel, wilson};
use spinsim_core::budget::{
    detuning_infidelity, mc_gate_infidelity, pn_to_rms_detuning, timing_infidelity,
    timing_tolerance, GateNoise, PnCalibration,
};
use spinsim_core::config::{Models, BUNDLED_FIG3};
use spinsim_core::dynamics::{propagator_rwa, rwa_gate_infidelity, RotatingFramePulse};
use spinsim_core::pulse::{gate_switch, synthesize_vco, PhaseNoiseEstimator, SwitchSpec, VcoSpec};
use spinsim_core::readout::{
    blockade_release_times, ero_miss_rate, tia_response, trro_error_rates, ChargeState, DqdConfig,
    LevelOffsets, TiaModel, TunnelSpec,
};
use spinsim_core::resonance::{min_splitting_for_temperature, rotation_duration};
use spinsim_core::sequence::{charge_path, execute, parse_sequence, validate};
use spinsim_core::spectral::{band_average, WelchAccumulator};
use spinsim_core::waveform::{Unit, Waveform};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(name: &str, value: f64, lo: f64, hi: f64) -> Result<(), String> {
    ensure(value >= lo && value <= hi, || {
        format!("{name} = {value:.6e} outside [{lo:.6e}, {hi:.6e}]")
    })
}

fn close(name: &str, value: f64, target: f64, tol: f64) -> Result<(), String> {
    ensure(rel(value, target) <= tol, || {
        format!(
            "{name} = {value:.6e} deviates from {target:.6e} by {:.3}% (limit {:.3}%)",
            100.0 * rel(value, target),
            100.0 * tol
        )
    })
}

/// `x` rounded to `n` significant digits.
fn sig_digits(x: f64, n: i32) -> f64 {
    let scale = 10f64.powi(n - 1 - x.abs().log10().floor() as i32);
    let r = (x * scale).round() / scale;
    format!("{r:.12}").parse().unwrap()
}

fn c1_thermal_larmor() -> Outcome {
    let s = min_splitting_for_temperature(3.0).map_err(|e| e.to_string())?;
    // k_B·T in eV and E/h from the exact SI constants.
    let (k_b, e, h) = (1.380649e-23, 1.602176634e-19, 6.62607015e-34);
    let energy_ev = k_b * 3.0 / e;
    let freq = k_b * 3.0 / h;
    close("splitting (eV)", s.energy_ev, energy_ev, 5e-5)?;
    close("splitting (Hz)", s.freq_hz, freq, 5e-5)?;
    ensure(sig_digits(s.energy_ev * 1e3, 4) == 0.2585, || {
        format!("{} meV", s.energy_ev * 1e3)
    })?;
    ensure(sig_digits(s.freq_hz / 1e9, 3) == 62.5, || {
        format!("{} GHz", s.freq_hz / 1e9)
    })?;
    close("vs 0.25 meV", s.energy_ev, 0.25e-3, 0.10)?;
    close("vs 60 GHz", s.freq_hz, 60e9, 0.10)?;
    Ok(format!(
        "{:.4} meV, {:.2} GHz",
        s.energy_ev * 1e3,
        s.freq_hz / 1e9
    ))
}

fn c2_half_pi_durations() -> Outcome {
    let a = rotation_duration(PI / 2.0, 750e6).map_err(|e| e.to_string())?;
    let b = rotation_duration(PI / 2.0, 12e9).map_err(|e| e.to_string())?;
    ensure(sig_digits(a * 1e12, 4) == 333.3, || {
        format!("t(750 MHz) = {a:.6e} s")
    })?;
    ensure(sig_digits(b * 1e12, 4) == 20.83, || {
        format!("t(12 GHz) = {b:.6e} s")
    })?;
    close("t(750 MHz) vs 330 ps", a, 330e-12, 0.05)?;
    close("t(12 GHz) vs 20 ps", b, 20e-12, 0.05)?;
    Ok(format!("{:.2} ps, {:.2} ps", a * 1e12, b * 1e12))
}

fn c3_detuning_pair() -> Outcome {
    let mut detail = Vec::new();
    for (df, f_r) in [(11.8e6, 750e6), (190e6, 12e9)] {
        let exact = detuning_infidelity(df, f_r).map_err(|e| e.to_string())?;
        within("detuning infidelity", exact, 1.06e-4, 1.44e-4)?;
        let noise = GateNoise {
            detuning_offset: df,
            ..GateNoise::default()
        };
        let mc = mc_gate_infidelity(&noise, f_r, 100, 1).map_err(|e| e.to_string())?;
        ensure((mc.mean - exact).abs() <= 1e-9, || {
            format!("MC {:.6e} vs analytic {exact:.6e}", mc.mean)
        })?;
        detail.push(format!("{exact:.4e}"));
    }
    Ok(format!("I = {} (MC agrees to 1e-9)", detail.join(", ")))
}

fn c4_timing() -> Outcome {
    let i = timing_infidelity(0.014).map_err(|e| e.to_string())?;
    within("timing infidelity", i, 1.06e-4, 1.44e-4)?;
    let a = timing_tolerance(750e6, 0.014).map_err(|e| e.to_string())?;
    let b = timing_tolerance(12e9, 0.014).map_err(|e| e.to_string())?;
    close("tolerance(750 MHz) vs 4.67 ps", a, 4.67e-12, 1e-3)?;
    close("tolerance(750 MHz) vs 4.7 ps", a, 4.7e-12, 0.03)?;
    close("tolerance(12 GHz) vs 291.7 fs", b, 291.7e-15, 1e-3)?;
    close("tolerance(12 GHz) vs 280 fs", b, 280e-15, 0.06)?;
    Ok(format!(
        "I = {i:.4e}, {:.3} ps, {:.1} fs",
        a * 1e12,
        b * 1e15
    ))
}

fn c5_pn_calibration() -> Outcome {
    let cal = PnCalibration::calibrate(-74.0, 750e6, 11.8e6).map_err(|e| e.to_string())?;
    let anchor = pn_to_rms_detuning(-74.0, 750e6, &cal).map_err(|e| e.to_string())?;
    close("anchor", anchor, 11.8e6, 1e-12)?;
    let fast = pn_to_rms_detuning(-62.0, 12e9, &cal).map_err(|e| e.to_string())?;
    close("(-62 dBc/Hz, 12 GHz) vs 190 MHz", fast, 190e6, 0.05)?;
    Ok(format!(
        "kappa = {:.4}, maps to {:.1} MHz",
        cal.kappa,
        fast / 1e6
    ))
}

fn c6_rwa_floor() -> Outcome {
    let ratios = [5.0, 10.0, 20.0, 40.0, 80.0];
    let values: Vec<f64> = ratios
        .iter()
        .map(|&r| rwa_gate_infidelity(r, None))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    within("worst-case infidelity at ratio 5", values[0], 3e-3, 1.2e-2)?;
    ensure(values.windows(2).all(|w| w[1] < w[0]), || {
        format!("not monotone: {values:?}")
    })?;
    Ok(format!(
        "ratio 5: {:.3e} (fidelity {:.2}%), ratio 80: {:.2e}",
        values[0],
        100.0 * (1.0 - values[0]),
        values[4]
    ))
}

fn c7_phase_noise() -> Outcome {
    let spec = VcoSpec {
        pn_at_1mhz: -90.0,
        model_startup: false,
        ..VcoSpec::default()
    };
    let (fs, duration, seeds) = (4.0 * spec.f_c, 16e-6, 100u64);
    let n = (duration * fs).round() as usize;
    let mut est = PhaseNoiseEstimator::new(spec.f_c, 10e6, fs, n).map_err(|e| e.to_string())?;
    // One realization at a time keeps memory bounded.
    for seed in 0..seeds {
        let w = synthesize_vco(&spec, duration, fs, seed).map_err(|e| e.to_string())?;
        est.add(&w).map_err(|e| e.to_string())?;
    }
    let l1 = est.level_dbc(1e6).map_err(|e| e.to_string())?;
    let l10 = est.level_dbc(10e6).map_err(|e| e.to_string())?;
    let slope = l10 - l1;
    ensure((l1 + 90.0).abs() <= 1.0, || {
        format!("L(1 MHz) = {l1:.2} dBc/Hz")
    })?;
    ensure((slope + 20.0).abs() <= 2.0, || {
        format!("slope = {slope:.2} dB/dec")
    })?;
    Ok(format!(
        "L(1 MHz) = {l1:.2} dBc/Hz, slope {slope:.2} dB/dec over {seeds} realizations"
    ))
}

fn c8_pulse_generation() -> Outcome {
    let f_c = 60e9;
    let fs = 100.0 * f_c;
    let spec = VcoSpec {
        pn_at_1mhz: f64::NEG_INFINITY,
        model_startup: false,
        ..VcoSpec::default()
    };
    let w = synthesize_vco(&spec, 300e-12, fs, 0).map_err(|e| e.to_string())?;
    let g = gate_switch(&w, &SwitchSpec::ideal(100e-12, 20e-12)).map_err(|e| e.to_string())?;
    let cycles = g.samples.iter().filter(|v| **v != 0.0).count() as f64 / fs * f_c;
    ensure((cycles - 1.2).abs() <= 0.05, || {
        format!("{cycles:.3} carrier cycles")
    })?;
    // Envelope duration by direct quadrature of the switch transmission.
    for (t_on, dt) in [(20e-12, 0.28e-12), (333e-12, 4.7e-12), (20e-12, 5e-12)] {
        let sw = SwitchSpec::with_timing_budget(10e-12, t_on, dt);
        let h = 1e-15;
        let integral: f64 = (0..((t_on + 30e-12) / h) as usize)
            .map(|k| sw.envelope(k as f64 * h) * h)
            .sum();
        ensure(integral > t_on, || {
            format!("envelope {integral:.4e} s not longer than {t_on:.4e} s")
        })?;
        ensure(rel(integral, sw.envelope_area()) < 1e-3, || {
            "envelope area disagrees with quadrature".into()
        })?;
    }
    Ok(format!(
        "{cycles:.3} cycles in a 20 ps gate; finite edges lengthen the pulse"
    ))
}

fn tia_suite(m: &TiaModel) -> Result<String, String> {
    let expected_dc = 10e-9 * 10f64.powf(m.z21_db_ohm / 20.0);
    // DC step.
    let fs = 20.0 * m.f3db;
    let i = Waveform::new(vec![10e-9; 4000], fs, 0.0, Unit::Ampere).map_err(|e| e.to_string())?;
    let v = tia_response(&i, m, None).map_err(|e| e.to_string())?;
    let dc = *v.samples.last().unwrap();
    close("DC output", dc, expected_dc, 0.02)?;
    // Tone at the corner, projected on an integer number of cycles.
    let fs = 16.0 * m.f3db;
    let n = 16_000;
    let x: Vec<f64> = (0..n)
        .map(|k| 1e-9 * (2.0 * PI * m.f3db * k as f64 / fs).sin())
        .collect();
    let v = tia_response(&Waveform::new(x, fs, 0.0, Unit::Ampere).unwrap(), m, None)
        .map_err(|e| e.to_string())?;
    let (mut c, mut s) = (0.0, 0.0);
    for k in n / 2..n {
        let ph = 2.0 * PI * m.f3db * k as f64 / fs;
        c += v.samples[k] * ph.cos();
        s += v.samples[k] * ph.sin();
    }
    let gain = 2.0 * c.hypot(s) / (n / 2) as f64 / 1e-9;
    close(
        "gain at f3db / DC gain",
        gain / m.z0(),
        std::f64::consts::FRAC_1_SQRT_2,
        0.01,
    )?;
    // Output noise density over an ensemble.
    let fs = 10.0 * m.f3db;
    let mut welch = WelchAccumulator::new(fs, 1024).map_err(|e| e.to_string())?;
    for seed in 0..40 {
        let zero = Waveform::new(vec![0.0; 1 << 14], fs, 0.0, Unit::Ampere).unwrap();
        let out = tia_response(&zero, m, Some(seed)).map_err(|e| e.to_string())?;
        welch.add(&out.samples[512..]);
    }
    let psd = welch.psd();
    let mut worst: f64 = 0.0;
    for frac in [0.05, 0.2, 0.5, 0.8, 1.0] {
        let f = frac * m.f3db;
        let measured = band_average(&psd, f, 1.05).ok_or("no PSD bins near test frequency")?;
        let model = m.output_noise_psd(f);
        let db = 10.0 * (measured / model).log10();
        worst = worst.max(db.abs());
        ensure(db.abs() <= 1.5, || {
            format!("noise PSD at {:.1} GHz off by {db:.2} dB", f / 1e9)
        })?;
    }
    Ok(format!(
        "{:?}: {:.3} mV DC, corner gain {:.4}, noise within {worst:.2} dB",
        m.temperature_tag,
        dc * 1e3,
        gain / m.z0()
    ))
}

fn c9_tia() -> Outcome {
    let room = TiaModel::room_temperature();
    close(
        "10 nA through the 300 K model vs 2.66 mV",
        10e-9 * room.z0(),
        2.66e-3,
        0.02,
    )?;
    let a = tia_suite(&room)?;
    let cryo = TiaModel::cryogenic();
    ensure(
        (cryo.z21_db_ohm, cryo.f3db, cryo.in_noise) == (110.7, 25e9, 0.44e-12),
        || "77 K preset changed".into(),
    )?;
    let b = tia_suite(&cryo)?;
    Ok(format!("{a}; {b}"))
}

fn c10_readout_stochastics() -> Outcome {
    let ts = TunnelSpec::default();
    let trials = 10_000;
    let tau = 0.3e-6;
    let (es, gs) = trro_error_rates(&ts, tau, trials, 101).map_err(|e| e.to_string())?;
    let p_es = (-ts.gamma_es * tau).exp();
    let p_gs = 1.0 - (-ts.gamma_gs * tau).exp();
    ensure(
        (es.p - p_es).abs() <= 3.0 * binomial_sigma(p_es, trials),
        || format!("TR-RO ES error {} vs {p_es}", es.p),
    )?;
    ensure(
        (gs.p - p_gs).abs() <= 3.0 * binomial_sigma(p_gs, trials),
        || format!("TR-RO GS error {} vs {p_gs}", gs.p),
    )?;

    let t1 = 1e-3;
    let times = blockade_release_times(t1, 50.0 * t1, trials, 202).map_err(|e| e.to_string())?;
    ensure(times.len() == trials, || {
        format!(
            "{} of {trials} triplets released in the window",
            times.len()
        )
    })?;
    let d = ks_statistic(&times, exp_cdf(1.0 / t1));
    let crit = ks_critical_5pct(times.len());
    ensure(d < crit, || {
        format!("KS statistic {d:.4} exceeds {crit:.4}")
    })?;

    let levels = LevelOffsets::from_zeeman(0.05e-3, Models::bundled().spin.zeeman_ev());
    let window = 0.2e-6;
    let miss = ero_miss_rate(&levels, &ts, window, trials, 303).map_err(|e| e.to_string())?;
    let p_miss = (-ts.gamma_es * window).exp();
    ensure(
        (miss.p - p_miss).abs() <= 3.0 * binomial_sigma(p_miss, trials),
        || format!("ERO miss {} vs {p_miss}", miss.p),
    )?;
    Ok(format!(
        "TR-RO {:.4}/{:.4} (expected {p_es:.4}/{p_gs:.4}), KS D = {d:.4} < {crit:.4}, ERO miss {:.4} (expected {p_miss:.4})",
        es.p, gs.p, miss.p
    ))
}

fn c11_sequence() -> Outcome {
    let cfg = DqdConfig::reference();
    let program = parse_sequence(BUNDLED_FIG3).map_err(|e| e.to_string())?;
    let diagnostics = validate(&program, &cfg);
    ensure(diagnostics.is_empty(), || {
        format!("diagnostics: {diagnostics:?}")
    })?;
    let path: Vec<ChargeState> = charge_path(&program, &cfg).into_iter().flatten().collect();
    let expected = [(0, 0), (0, 1), (1, 1), (1, 1), (0, 1), (0, 1), (0, 0)]
        .map(|(l, r)| ChargeState::new(l, r));
    ensure(path == expected, || format!("charge path {path:?}"))?;

    let models = Models::bundled();
    let pi = parse_sequence(&BUNDLED_FIG3.replace(
        "duration=333.3333333333333ps",
        "duration=666.6666666666666ps",
    ))
    .map_err(|e| e.to_string())?;
    let shots = 1000;
    let result = execute(&pi, &models, shots, 2024).map_err(|e| e.to_string())?;
    // Spin-dynamics prediction for the left spin.
    let u = propagator_rwa(&RotatingFramePulse {
        f_r: models.drive.f_r,
        detuning: 60e9 - models.spin.larmor_hz(),
        phase: 0.0,
        duration: 666.6666666666666e-12,
    })
    .map_err(|e| e.to_string())?;
    let p_pred = u.spin_up_from_down();
    let left = result.left.ok_or("no left-dot estimate")?;
    let right = result.right.ok_or("no right-dot estimate")?;
    let (lo, hi) = wilson(left.successes, shots, 3.0);
    ensure(lo <= 1.0 && 1.0 <= hi + 1e-12, || {
        format!("left estimate {} excludes 1.0", left.p)
    })?;
    ensure(
        (left.p - p_pred).abs() <= 3.0 * binomial_sigma(p_pred, shots).max(1.0 / shots as f64),
        || format!("left estimate {} vs predicted {p_pred}", left.p),
    )?;
    ensure(right.successes == 0, || {
        format!("right estimate {}", right.p)
    })?;
    Ok(format!("7 steps, path (0,0)->(0,1)->(1,1)->(1,1)->(0,1)->(0,1)->(0,0), pi-pulse P(up) = {:.3} at {shots} shots", left.p))
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        (1, "thermal and Larmor arithmetic", c1_thermal_larmor),
        (2, "pi/2 durations", c2_half_pi_durations),
        (3, "detuning infidelity pair", c3_detuning_pair),
        (4, "timing infidelity and tolerance", c4_timing),
        (5, "phase-noise calibration", c5_pn_calibration),
        (6, "RWA floor", c6_rwa_floor),
        (7, "phase-noise synthesis", c7_phase_noise),
        (8, "pulse generation", c8_pulse_generation),
        (9, "TIA behavioural model", c9_tia),
        (10, "readout stochastics", c10_readout_stochastics),
        (11, "sequence engine", c11_sequence),
    ];
    let mut failures = 0;
    for (n, name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{secs:.1} s]"),
            Err(why) => {
                failures += 1;
                println!("criterion {n:>2} FAIL  {name}: {why} [{secs:.1} s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed (criterion 12 runs in the CLI crate)",
        11 - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
