// SPDX-License-Identifier: Apache-2.0

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use mtpla::device::{leakage_saving_ratio, virtual_ground_closed_form, virtual_ground_numeric, DeviceError};
use mtpla::fixtures;
use mtpla::netlist::{synthesize_with, GatedNetlist, SleepMode, Variant};
use mtpla::pla::{parse_pla, InputVector, PlaPersonality};
use mtpla::power::{
    calibrate, compare_designs, line_power, sweep_all_vectors, Calibration, ComparisonSummary,
    LineCalibration, PowerError, PowerReport, PowerTable,
};
use mtpla::transient::{
    footer_resistance, simulate_step, wakeup_latency, RcStage, TransientError, WakeupParams,
};
use serde::Serialize;

use crate::format::{g6, table};
use crate::settings::Settings;
use crate::CliError;

fn user(e: impl std::fmt::Display) -> CliError {
    CliError::User(e.to_string())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::User(format!("{}: {e}", path.display()))
}

fn load_pla(s: &Settings) -> Result<PlaPersonality, CliError> {
    match &s.pla {
        None => Ok(fixtures::three_input_minterms()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            parse_pla(&text).map_err(|e| io_err(path, e))
        }
    }
}

fn read_report(path: Option<&Path>) -> Result<PowerReport, CliError> {
    match path {
        None => Ok(fixtures::table1()),
        Some(path) => {
            let f = File::open(path).map_err(|e| io_err(path, e))?;
            PowerReport::read_csv(f).map_err(|e| io_err(path, e))
        }
    }
}

fn read_table(path: &Path) -> Result<PowerTable, CliError> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    PowerTable::read_csv(f).map_err(|e| io_err(path, e))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| io_err(&path, e))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let mut w = create(dir, name)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| io_err(&dir.join(name), e))
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

fn power_err(e: PowerError) -> CliError {
    match e {
        PowerError::Io(_) | PowerError::Json(_) | PowerError::Csv(_) => internal(e),
        other => user(other),
    }
}

fn out_dir(s: &Settings) -> Result<&Path, CliError> {
    let dir = s.out_dir()?;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    Ok(dir)
}

pub fn vgnd(s: &Settings) -> Result<(), CliError> {
    let f = s.footer()?;
    let vdd = s.supply()?.vdd;
    let closed = virtual_ground_closed_form(&f, vdd).map_err(user)?;
    let ratio = leakage_saving_ratio(&f, vdd, closed.clamped).map_err(user)?;
    let (numeric, diff) = match virtual_ground_numeric(&f, vdd) {
        Ok(v) => (g6(v), g6((closed.raw - v).abs())),
        Err(DeviceError::NoSolution {
            residual_low,
            residual_high,
            ..
        }) => (
            format!(
                "no root in [0, vdd] (residual {} / {} decades)",
                g6(residual_low),
                g6(residual_high)
            ),
            "n/a".into(),
        ),
        Err(e) => return Err(user(e)),
    };
    let rows = vec![
        vec!["vdd [V]".into(), g6(vdd)],
        vec!["vg [V]".into(), g6(f.vg)],
        vec!["w_circuit/w_footer".into(), g6(f.w_circuit / f.w_footer)],
        vec!["vgnd closed form, raw [V]".into(), g6(closed.raw)],
        vec!["vgnd closed form, clamped [V]".into(), g6(closed.clamped)],
        vec!["vgnd bisection [V]".into(), numeric],
        vec!["|closed - bisection| [V]".into(), diff],
        vec!["I_sleep/I_active at clamped vgnd".into(), g6(ratio)],
    ];
    print!("{}", table(&["quantity", "value"], &rows));
    Ok(())
}

struct Design {
    conventional: GatedNetlist,
    gated: GatedNetlist,
}

fn design(s: &Settings, pla: &PlaPersonality) -> Result<Design, CliError> {
    let footer = s.footer()?;
    let opts = s.synth_options()?;
    Ok(Design {
        conventional: synthesize_with(pla, Variant::Conventional, None, &opts).map_err(user)?,
        gated: synthesize_with(pla, Variant::PowerGated, Some(&footer), &opts).map_err(user)?,
    })
}

/// Line calibration and, when fitted to a reference table, its residuals.
fn line_calibration(
    s: &Settings,
    d: &Design,
) -> Result<(LineCalibration, Option<Calibration>), CliError> {
    match s.calibration_mode.as_deref() {
        Some("model") => {
            let cal = LineCalibration::from_model(&d.gated, &s.supply()?).map_err(power_err)?;
            Ok((cal, None))
        }
        None | Some("table") => {
            let reference = read_report(s.calibration.as_deref())?;
            let fit = calibrate(&reference).map_err(power_err)?;
            if let Some(line) = d.gated.inputs.iter().find(|l| fit.calibration.get(l).is_none()) {
                let covered: Vec<_> = fit.calibration.lines.iter().map(|l| l.line.as_str()).collect();
                return Err(CliError::User(format!(
                    "line {line} has no calibration entry (reference covers {}); \
                     pass a matching --calibration or --calibration_mode model",
                    covered.join(", ")
                )));
            }
            Ok((fit.calibration.clone(), Some(fit)))
        }
        Some(other) => Err(CliError::User(format!(
            "calibration_mode must be table or model, got \"{other}\""
        ))),
    }
}

pub fn power(s: &Settings) -> Result<(), CliError> {
    let pla = load_pla(s)?;
    let vector: InputVector = s
        .vector
        .as_deref()
        .ok_or_else(|| CliError::User("vector is required".into()))?
        .parse()
        .map_err(CliError::User)?;
    let d = design(s, &pla)?;
    let (cal, _) = line_calibration(s, &d)?;
    let lines = line_power(&d.gated, &vector, &cal, &s.supply()?).map_err(power_err)?;
    let rows: Vec<Vec<String>> = lines
        .iter()
        .map(|l| {
            let saving = if l.conventional_pw > 0.0 {
                1.0 - l.gated_pw / l.conventional_pw
            } else {
                0.0
            };
            vec![
                l.line.clone(),
                g6(l.conventional_pw),
                g6(l.gated_pw),
                g6(saving),
                g6(l.conventional_leakage_pw),
                g6(l.gated_leakage_pw),
            ]
        })
        .collect();
    println!("vector {vector}");
    print!(
        "{}",
        table(
            &["line", "conventional_pw", "gated_pw", "saving", "leak_conv_pw", "leak_gated_pw"],
            &rows
        )
    );
    Ok(())
}

fn summary_rows(summary: &ComparisonSummary) -> Vec<Vec<String>> {
    let pct = |x: f64| g6(100.0 * x);
    let mut rows: Vec<Vec<String>> = summary
        .lines
        .iter()
        .map(|l| {
            vec![
                l.line.clone(),
                l.active_rows.to_string(),
                pct(l.mean_saving),
                pct(l.min_saving),
                pct(l.max_saving),
                pct(l.total_saving),
            ]
        })
        .collect();
    rows.push(vec![
        "all".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        pct(summary.total_saving),
    ]);
    rows
}

const SUMMARY_HEADER: [&str; 6] = ["line", "rows", "mean_%", "min_%", "max_%", "total_%"];

#[derive(Serialize)]
struct SweepJson<'a> {
    report: &'a PowerReport,
    summary: &'a ComparisonSummary,
    calibration: &'a LineCalibration,
    residuals: Option<&'a Calibration>,
}

pub fn sweep(s: &Settings) -> Result<(), CliError> {
    let pla = load_pla(s)?;
    let dir = out_dir(s)?;
    let supply = s.supply()?;
    let d = design(s, &pla)?;
    let (cal, fit) = line_calibration(s, &d)?;

    let report = sweep_all_vectors(&d.gated, &cal, &supply).map_err(power_err)?;
    let conventional = report.conventional();
    let gated = report.gated();
    let summary = compare_designs(&conventional, &gated).map_err(power_err)?;

    report.write_csv(create(dir, "report.csv")?).map_err(power_err)?;
    conventional
        .write_csv(create(dir, "conventional.csv")?)
        .map_err(power_err)?;
    gated.write_csv(create(dir, "gated.csv")?).map_err(power_err)?;
    summary.write_csv(create(dir, "summary.csv")?).map_err(power_err)?;
    if let Some(fit) = &fit {
        fit.write_residuals_csv(create(dir, "calibration.csv")?)
            .map_err(power_err)?;
    }
    let json = serde_json::to_string_pretty(&SweepJson {
        report: &report,
        summary: &summary,
        calibration: &cal,
        residuals: fit.as_ref(),
    })
    .map_err(internal)?;
    write_text(dir, "report.json", &json)?;
    write_text(
        dir,
        "netlist_conventional.json",
        &d.conventional.to_json().map_err(internal)?,
    )?;
    write_text(dir, "netlist_gated.json", &d.gated.to_json().map_err(internal)?)?;

    println!(
        "{} rows ({} vectors x {} lines) written to {}",
        report.rows.len(),
        report.rows.len() / d.gated.inputs.len().max(1),
        d.gated.inputs.len(),
        dir.display()
    );
    if let Some(fit) = &fit {
        println!(
            "calibration: max inlier error {}%",
            g6(100.0 * fit.max_inlier_error())
        );
        for o in fit.outliers() {
            println!(
                "outlier: vector {} line {} {:?} reference {} pW, model {} pW",
                o.vector,
                o.line,
                o.variant,
                g6(o.reference_pw),
                g6(o.model_pw)
            );
        }
    }
    print!("{}", table(&SUMMARY_HEADER, &summary_rows(&summary)));
    Ok(())
}

pub fn compare(s: &Settings) -> Result<(), CliError> {
    let (conventional, gated) = match (&s.conventional, &s.gated) {
        (Some(c), Some(g)) => (read_table(c)?, read_table(g)?),
        (None, None) => {
            let r = read_report(s.reference.as_deref())?;
            (r.conventional(), r.gated())
        }
        _ => {
            return Err(CliError::User(
                "conventional and gated must be given together".into(),
            ))
        }
    };
    let summary = compare_designs(&conventional, &gated).map_err(power_err)?;
    print!("{}", table(&SUMMARY_HEADER, &summary_rows(&summary)));
    if let Some(dir) = &s.out_dir {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        summary.write_csv(create(dir, "summary.csv")?).map_err(power_err)?;
    }
    Ok(())
}

fn transient_err(e: TransientError) -> CliError {
    match e {
        TransientError::Stability {
            timestep,
            max_timestep,
            reason,
        } => CliError::User(format!(
            "timestep {} s is too large ({reason}); use timestep <= {} s",
            g6(timestep),
            g6(max_timestep)
        )),
        other => user(other),
    }
}

pub fn transient(s: &Settings) -> Result<(), CliError> {
    let pla = load_pla(s)?;
    let supply = s.supply()?;
    let d = design(s, &pla)?;
    let (r_drive, c_node, r_unit) = (s.r_drive()?, s.c_node()?, s.r_unit()?);
    let (duration, timestep) = (s.duration()?, s.timestep()?);
    let threshold = s.threshold_fraction()?;
    let nodes = s.node.clone().unwrap_or_else(|| d.gated.outputs.clone());

    let mut stages = Vec::new();
    for node in &nodes {
        if !d.gated.gates.iter().any(|g| &g.output == node) {
            return Err(CliError::User(format!("node {node} is not driven by a gate")));
        }
        let domain = d
            .gated
            .domain_of_net(node)
            .ok_or_else(|| CliError::Internal(format!("gated driver of {node} has no domain")))?;
        let r_footer = footer_resistance(r_unit, domain.footer.w_footer);
        stages.push((
            node.clone(),
            RcStage::conventional(r_drive, c_node, 0.0, supply.vdd),
            RcStage::gated(r_drive, r_footer, c_node, 0.0, supply.vdd),
        ));
    }
    let mut waves = Vec::new();
    for (node, conv, gated) in &stages {
        let wc = simulate_step(conv, duration, timestep).map_err(transient_err)?;
        let wg = simulate_step(gated, duration, timestep).map_err(transient_err)?;
        waves.push((node, conv, wc.with_node(node.clone()), gated, wg.with_node(node.clone())));
    }

    let dir = out_dir(s)?;
    let level = 1.0 - (-1f64).exp();
    let mut rows = Vec::new();
    for (node, conv, wc, gated, wg) in &waves {
        for (variant, stage, w) in [("conventional", conv, wc), ("gated", gated, wg)] {
            let name = format!("{node}_{variant}.csv");
            w.write_csv(create(dir, &name)?).map_err(internal)?;
            let t63 = w
                .crossing_time(level * supply.vdd)
                .map(g6)
                .unwrap_or_else(|| "not reached".into());
            rows.push(vec![
                node.to_string(),
                variant.to_string(),
                g6(stage.time_constant()),
                t63,
                g6(w.last()),
            ]);
        }
    }
    print!(
        "{}",
        table(&["node", "variant", "rc_s", "t63_s", "final_v"], &rows)
    );

    let asleep = d.gated.set_mode(SleepMode::Sleep).map_err(internal)?;
    let params = WakeupParams {
        vdd: supply.vdd,
        r_unit,
        capacitance: s.c_vgnd()?,
        timestep: None,
        max_duration: None,
    };
    let mut rows = Vec::new();
    for domain in &asleep.sleep_domains {
        let vgnd = virtual_ground_closed_form(&domain.footer, supply.vdd).map_err(user)?;
        let latency = wakeup_latency(domain, &params, threshold).map_err(transient_err)?;
        rows.push(vec![
            domain.name.clone(),
            g6(vgnd.clamped),
            g6(footer_resistance(r_unit, domain.footer.w_footer)),
            g6(latency),
        ]);
    }
    println!("wake-up to {} of sleep vgnd", g6(threshold));
    print!(
        "{}",
        table(&["domain", "vgnd_v", "r_footer_ohm", "latency_s"], &rows)
    );
    Ok(())
}
