// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mtpla::device::{
    average_power, virtual_ground_closed_form, virtual_ground_numeric, DeviceError, DeviceParams,
    FooterConfig, SupplyConfig,
};
use mtpla::fixtures;
use mtpla::netlist::{synthesize, SleepDomain, SleepMode, Variant};
use mtpla::pla::{parse_pla, InputVector, PlaPersonality};
use mtpla::power::{calibrate, compare_designs, sweep_all_vectors};
use mtpla::transient::{simulate_step, wakeup_latency, RcStage, WakeupParams, DEFAULT_R_UNIT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, pass: String, fail: String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail)
    }
}

/// 1. Calibrated model reproduces Table 1 within 2%, line C "001" gated
/// flagged and excluded, zeros exact, under one second.
fn table1_golden() -> Outcome {
    let start = Instant::now();
    let reference = fixtures::table1();
    let fit = calibrate(&reference).map_err(|e| e.to_string())?;
    let n = synthesize(
        &fixtures::three_input_minterms(),
        Variant::PowerGated,
        Some(&FooterConfig::default()),
    )
    .map_err(|e| e.to_string())?;
    let model = sweep_all_vectors(&n, &fit.calibration, &SupplyConfig::default())
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let flagged: Vec<(String, String, Variant)> = fit
        .outliers()
        .map(|r| (r.vector.to_string(), r.line.clone(), r.variant))
        .collect();
    if flagged != [("001".to_string(), "C".to_string(), Variant::PowerGated)] {
        return Err(format!("unexpected outlier set {flagged:?}"));
    }
    if model.rows.len() != reference.rows.len() {
        return Err(format!("{} model rows vs {}", model.rows.len(), reference.rows.len()));
    }
    let mut worst: f64 = 0.0;
    for (m, r) in model.rows.iter().zip(&reference.rows) {
        if (&m.vector, &m.line) != (&r.vector, &r.line) {
            return Err(format!("row order differs at {} {}", r.vector, r.line));
        }
        for (got, want, is_outlier) in [
            (m.conventional_pw, r.conventional_pw, false),
            (m.gated_pw, r.gated_pw, r.vector.to_string() == "001" && r.line == "C"),
        ] {
            if want == 0.0 {
                if got != 0.0 {
                    return Err(format!("{} {}: expected exact zero, got {got}", r.vector, r.line));
                }
            } else if !is_outlier {
                let rel = ((got - want) / want).abs();
                worst = worst.max(rel);
                if rel > 0.02 {
                    return Err(format!("{} {}: {got} vs {want} ({:.3}%)", r.vector, r.line, 100.0 * rel));
                }
            }
        }
    }
    check(
        elapsed < Duration::from_secs(1),
        format!("worst entry error {:.3}%, outlier 001/C flagged, {elapsed:?}", 100.0 * worst),
        format!("took {elapsed:?}"),
    )
}

/// 2. Per-line mean saving over Table 1 equals the stated percentages to
/// within 0.1 percentage point.
fn saving_trend() -> Outcome {
    let t = fixtures::table1();
    let s = compare_designs(&t.conventional(), &t.gated()).map_err(|e| e.to_string())?;
    let targets = [("A", 18.19), ("B", 12.04), ("C", 15.3)];
    let mut parts = Vec::new();
    let mut ok = true;
    for (line, want) in targets {
        let got = 100.0 * s.line(line).ok_or(format!("no line {line}"))?.mean_saving;
        let good = (got - want).abs() <= 0.1;
        ok &= good;
        parts.push(format!(
            "{line} {got:.4}% vs {want}% {}",
            if good { "ok" } else { "OFF" }
        ));
    }
    check(ok, parts.join(", "), parts.join(", "))
}

fn random_footer(rng: &mut ChaCha8Rng) -> (FooterConfig, f64) {
    let mut device = |vth_lo: f64, vth_hi: f64| DeviceParams {
        i0: 10f64.powf(rng.gen_range(-9.0..-6.0)),
        w_over_l: rng.gen_range(0.5..10.0),
        vth: rng.gen_range(vth_lo..vth_hi),
        eta: rng.gen_range(0.02..0.3),
        ss: rng.gen_range(0.06..0.12),
    };
    let circuit = device(0.1, 0.5);
    let footer = device(0.2, 0.8);
    let vdd = rng.gen_range(0.8..5.0);
    let f = FooterConfig {
        w_circuit: 10f64.powf(rng.gen_range(-1.0..2.0)),
        w_footer: 10f64.powf(rng.gen_range(-1.0..1.0)),
        vg: footer.vth - rng.gen_range(0.01..0.6),
        circuit,
        footer,
    };
    (f, vdd)
}

/// Draws footer configurations until `count` have a virtual-ground solution
/// inside [0, vdd]; rejected draws must be ones the closed form also puts
/// outside that range.
fn footer_sweep(count: usize) -> Result<Vec<(FooterConfig, f64, f64)>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f007);
    let mut accepted = Vec::with_capacity(count);
    let mut draws = 0;
    while accepted.len() < count {
        draws += 1;
        if draws > 100 * count {
            return Err(format!("only {} valid configurations in {draws} draws", accepted.len()));
        }
        let (f, vdd) = random_footer(&mut rng);
        if f.validate().is_err() {
            continue;
        }
        match virtual_ground_numeric(&f, vdd) {
            Ok(v) => accepted.push((f, vdd, v)),
            Err(DeviceError::NoSolution { .. }) => {
                let raw = virtual_ground_closed_form(&f, vdd).map_err(|e| e.to_string())?.raw;
                if (0.0..=vdd).contains(&raw) {
                    return Err(format!("bisection found no root but closed form gives {raw} in [0, {vdd}]"));
                }
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(accepted)
}

/// 3. Closed form and bisection agree within 1e-9 V over 1000 random
/// configurations, under five seconds.
fn closed_form_vs_bisection() -> Outcome {
    let start = Instant::now();
    let sweep = footer_sweep(1000)?;
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for (f, vdd, numeric) in &sweep {
        let raw = virtual_ground_closed_form(f, *vdd).map_err(|e| e.to_string())?.raw;
        let d = (raw - numeric).abs();
        worst = worst.max(d);
        if d > 1e-9 {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        failures == 0 && elapsed < Duration::from_secs(5),
        format!("{} configs, max |diff| {worst:.2e} V, {elapsed:?}", sweep.len()),
        format!("{failures} of {} configs disagree (max {worst:.2e} V), {elapsed:?}", sweep.len()),
    )
}

/// 4. Finite-difference dVgnd/dVg equals -1/(2 eta) within 1e-6 relative.
fn negative_slope() -> Outcome {
    let sweep = footer_sweep(1000)?;
    let dv = 1e-3;
    let mut worst: f64 = 0.0;
    for (f, vdd, _) in &sweep {
        let lower = FooterConfig { vg: f.vg - dv, ..*f };
        let a = virtual_ground_closed_form(&lower, *vdd).map_err(|e| e.to_string())?.raw;
        let b = virtual_ground_closed_form(f, *vdd).map_err(|e| e.to_string())?.raw;
        let slope = (b - a) / dv;
        let expected = -1.0 / (2.0 * f.footer.eta);
        worst = worst.max(((slope - expected) / expected).abs());
    }
    check(
        worst <= 1e-6,
        format!("{} configs, worst relative slope error {worst:.2e}", sweep.len()),
        format!("worst relative slope error {worst:.2e}"),
    )
}

fn corpus() -> Result<Vec<(String, PlaPersonality)>, String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/corpus");
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "pla"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).map_err(|e| e.to_string())?;
            let pla = parse_pla(&text).map_err(|e| format!("{}: {e}", p.display()))?;
            Ok((p.file_name().unwrap().to_string_lossy().into_owned(), pla))
        })
        .collect()
}

/// Truth table by brute force straight from the planes.
fn brute_force(p: &PlaPersonality, v: &InputVector) -> Vec<bool> {
    (0..p.num_outputs())
        .map(|j| {
            (0..p.num_products()).any(|i| {
                p.or_plane()[i][j]
                    && p.and_plane()[i]
                        .iter()
                        .zip(v.bits())
                        .all(|(lit, &b)| lit.matches(b))
            })
        })
        .collect()
}

/// 5. Gate-level simulation of both variants equals brute force on every
/// vector of every corpus file (n <= 10, at least 20 files), under 10 s.
fn logic_equivalence() -> Outcome {
    let start = Instant::now();
    let files = corpus()?;
    if files.len() < 20 {
        return Err(format!("corpus has only {} files", files.len()));
    }
    let footer = FooterConfig::default();
    let mut vectors = 0usize;
    for (name, p) in &files {
        if p.num_inputs() > 10 {
            return Err(format!("{name} has {} inputs", p.num_inputs()));
        }
        for variant in [Variant::Conventional, Variant::PowerGated] {
            let n = synthesize(p, variant, Some(&footer)).map_err(|e| e.to_string())?;
            for v in InputVector::all(p.num_inputs()).map_err(|e| e.to_string())? {
                let got = n.simulate_logic(&v).map_err(|e| e.to_string())?;
                if got != brute_force(p, &v) {
                    return Err(format!("{name} {variant:?} differs at {v}"));
                }
                vectors += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(10),
        format!("{} files, {vectors} vector checks, {elapsed:?}", files.len()),
        format!("took {elapsed:?}"),
    )
}

/// 6. Doubling vdd quadruples the switching power to machine precision.
fn dynamic_scaling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s = SupplyConfig {
            vdd: rng.gen_range(0.1..10.0),
            f_clk: rng.gen_range(1e3..1e9),
            c_load: rng.gen_range(1e-16..1e-11),
            alpha: rng.gen_range(0.01..1.0),
            i_sc: rng.gen_range(0.0..1e-4),
        };
        let p1 = average_power(&s, 1e-9).map_err(|e| e.to_string())?;
        let p2 = average_power(&SupplyConfig { vdd: 2.0 * s.vdd, ..s }, 1e-9).map_err(|e| e.to_string())?;
        worst = worst.max((p2.switching / (4.0 * p1.switching) - 1.0).abs());
    }
    check(
        worst < 1e-12,
        format!("1000 supplies, worst relative error {worst:.2e}"),
        format!("worst relative error {worst:.2e}"),
    )
}

fn max_error(stage: &RcStage, duration: f64, h: f64) -> Result<f64, String> {
    let w = simulate_step(stage, duration, h).map_err(|e| e.to_string())?;
    Ok(w.samples
        .iter()
        .enumerate()
        .map(|(i, x)| (x - stage.analytic(w.time(i))).abs())
        .fold(0.0, f64::max))
}

/// 7. At RC/100 every sample is within 0.5% of the step amplitude of the
/// exact exponential; halving the step shrinks the max error 1.8-2.2x.
fn transient_oracle() -> Outcome {
    let stage = RcStage::conventional(10e3, 100e-12, 0.0, 5.0);
    let tau = stage.time_constant();
    let swing = 5.0;
    let coarse = max_error(&stage, 5.0 * tau, tau / 100.0)?;
    let fine = max_error(&stage, 5.0 * tau, tau / 200.0)?;
    let ratio = coarse / fine;
    check(
        coarse / swing <= 0.005 && (1.8..=2.2).contains(&ratio),
        format!("max error {:.4}% of swing, refinement ratio {ratio:.3}", 100.0 * coarse / swing),
        format!("max error {:.4}% of swing, refinement ratio {ratio:.3}", 100.0 * coarse / swing),
    )
}

/// 8. Wake-up latency strictly falls over a 10-point footer-width sweep and
/// matches -RC ln(0.5) within 0.5%.
fn wakeup_tradeoff() -> Outcome {
    let params = WakeupParams {
        vdd: 5.0,
        r_unit: DEFAULT_R_UNIT,
        capacitance: 100e-12,
        timestep: None,
        max_duration: None,
    };
    let mut latencies = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 1..=10 {
        let w_footer = 0.5 * i as f64;
        let domain = SleepDomain {
            name: "and_array".into(),
            footer: FooterConfig {
                w_circuit: 27.0,
                w_footer,
                ..FooterConfig::default()
            },
            members: vec![],
            virtual_ground: "vgnd_and_array".into(),
            mode: SleepMode::Sleep,
        };
        let lat = wakeup_latency(&domain, &params, 0.5).map_err(|e| e.to_string())?;
        let rc = DEFAULT_R_UNIT / w_footer * params.capacitance;
        let expected = -rc * 0.5f64.ln();
        worst = worst.max(((lat - expected) / expected).abs());
        latencies.push(lat);
    }
    let decreasing = latencies.windows(2).all(|w| w[1] < w[0]);
    check(
        decreasing && worst <= 0.005,
        format!("strictly decreasing, worst ln2 deviation {:.4}%", 100.0 * worst),
        format!("decreasing={decreasing}, worst ln2 deviation {:.4}%", 100.0 * worst),
    )
}

fn dir_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let p = e.map_err(|e| e.to_string())?.path();
            let bytes = fs::read(&p).map_err(|e| e.to_string())?;
            Ok((p.file_name().unwrap().to_string_lossy().into_owned(), bytes))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

/// 9. Two `sweep` runs write byte-identical files.
fn sweep_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_mtpla"))
            .args(["sweep", "--out_dir"])
            .arg(&dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("sweep failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        outputs.push(dir_bytes(&dir)?);
    }
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    check(
        outputs[0] == outputs[1] && !outputs[0].is_empty(),
        format!("{} files identical ({})", names.len(), names.join(", ")),
        "sweep outputs differ between runs".into(),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 Table 1 golden", table1_golden),
        ("2 saving trend", saving_trend),
        ("3 closed form = bisection", closed_form_vs_bisection),
        ("4 negative slope", negative_slope),
        ("5 logic equivalence", logic_equivalence),
        ("6 dynamic-power scaling", dynamic_scaling),
        ("7 transient oracle", transient_oracle),
        ("8 wake-up trade-off", wakeup_tradeoff),
        ("9 sweep determinism", sweep_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
