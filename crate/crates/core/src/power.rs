// SPDX-License-Identifier: Apache-2.0

//! Per-vector, per-line power of conventional and footer-gated PLAs.
//!
//! Power is attributed to the input-line driver branches: a line draws
//! nothing while its input bit is 0, and a calibrated base power while it is
//! 1. In the gated design only the leakage share of that base is reduced,
//! by the sleep/active leakage ratio of the footer that gates the line's
//! complement generator.

use std::collections::{BTreeMap, HashMap};
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{
    average_power, leakage_saving_ratio, subthreshold_leakage, virtual_ground_closed_form,
    DeviceError, SupplyConfig,
};
use crate::netlist::{GatedNetlist, Variant};
use crate::pla::{InputVector, PlaError};

/// Watts to picowatts.
pub const PW_PER_W: f64 = 1e12;
/// Relative agreement expected between a calibrated model and its reference.
pub const CALIBRATION_TOLERANCE: f64 = 0.02;
/// Robust-spread multiple beyond which a reference entry is an outlier.
pub const OUTLIER_SPREAD_FACTOR: f64 = 3.0;
/// Scale from median absolute deviation to a normal standard deviation.
const MAD_TO_SIGMA: f64 = 1.4826;

#[derive(Debug, Error)]
pub enum PowerError {
    #[error("line {0} has no calibration entry")]
    Uncalibrated(String),
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("report shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Pla(#[from] PlaError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Calibrated power of one input line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineCal {
    pub line: String,
    /// Conventional driver power at logic high, picowatts.
    pub base_pw: f64,
    /// Gated-to-conventional power ratio, in (0, 1].
    pub gated_scaling: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LineCalibration {
    pub lines: Vec<LineCal>,
}

impl LineCalibration {
    pub fn new(lines: Vec<LineCal>) -> Result<Self, PowerError> {
        for l in &lines {
            if !(l.base_pw >= 0.0 && l.base_pw.is_finite()) {
                return Err(PowerError::Calibration(format!(
                    "line {}: base power must be non-negative",
                    l.line
                )));
            }
            if !(l.gated_scaling > 0.0 && l.gated_scaling <= 1.0) {
                return Err(PowerError::Calibration(format!(
                    "line {}: gated scaling {} outside (0, 1]",
                    l.line, l.gated_scaling
                )));
            }
        }
        Ok(LineCalibration { lines })
    }

    pub fn get(&self, line: &str) -> Option<&LineCal> {
        self.lines.iter().find(|l| l.line == line)
    }

    /// Calibration predicted from the device model instead of measurements:
    /// each line's base power is the average power of an off driver
    /// transistor leaking at full supply plus the supply's switching and
    /// short-circuit terms, and the gated scaling follows from reducing the
    /// leakage share by the footer's sleep/active ratio.
    pub fn from_model(netlist: &GatedNetlist, supply: &SupplyConfig) -> Result<Self, PowerError> {
        let mut lines = Vec::new();
        for line in &netlist.inputs {
            let (device, ratio) = match netlist.domain_of_input(line) {
                Some(domain) => {
                    let vgnd = virtual_ground_closed_form(&domain.footer, supply.vdd)?;
                    (
                        domain.footer.circuit,
                        leakage_saving_ratio(&domain.footer, supply.vdd, vgnd.clamped)?,
                    )
                }
                None => (crate::device::DeviceParams::DEFAULT_LOGIC, 1.0),
            };
            let i_leak = subthreshold_leakage(&device, 0.0, supply.vdd)?;
            let p = average_power(supply, i_leak)?;
            let total = p.total();
            let gated = p.switching + p.short_circuit + p.leakage * ratio;
            lines.push(LineCal {
                line: line.clone(),
                base_pw: total * PW_PER_W,
                gated_scaling: if total > 0.0 { gated / total } else { 1.0 },
            });
        }
        LineCalibration::new(lines)
    }
}

/// Power of one line for one vector, both designs, split into the part that
/// gating leaves alone and the leakage part it reduces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinePower {
    pub line: String,
    pub conventional_pw: f64,
    pub gated_pw: f64,
    /// Switching plus short-circuit power, equal in both designs.
    pub active_pw: f64,
    pub conventional_leakage_pw: f64,
    pub gated_leakage_pw: f64,
}

impl LinePower {
    fn idle(line: &str) -> Self {
        LinePower {
            line: line.to_string(),
            conventional_pw: 0.0,
            gated_pw: 0.0,
            active_pw: 0.0,
            conventional_leakage_pw: 0.0,
            gated_leakage_pw: 0.0,
        }
    }
}

/// Footer sleep/active leakage ratio seen by input `line`; 1 when ungated.
fn line_leakage_ratio(netlist: &GatedNetlist, line: &str, vdd: f64) -> Result<f64, PowerError> {
    match netlist.domain_of_input(line) {
        Some(domain) => {
            let vgnd = virtual_ground_closed_form(&domain.footer, vdd)?;
            Ok(leakage_saving_ratio(&domain.footer, vdd, vgnd.clamped)?)
        }
        None => Ok(1.0),
    }
}

fn split_line(line: &str, cal: &LineCal, ratio: f64) -> Result<LinePower, PowerError> {
    let base = cal.base_pw;
    let reduction = 1.0 - cal.gated_scaling;
    let leak_share = if reduction == 0.0 {
        0.0
    } else if ratio < 1.0 {
        reduction / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    if leak_share > 1.0 + 1e-12 {
        return Err(PowerError::Calibration(format!(
            "line {line}: gated scaling {} needs more saving than the footer's leakage ratio {ratio} allows",
            cal.gated_scaling
        )));
    }
    let leak_share = leak_share.min(1.0);
    let conventional_leakage_pw = base * leak_share;
    let gated_leakage_pw = conventional_leakage_pw * ratio;
    let active_pw = base - conventional_leakage_pw;
    Ok(LinePower {
        line: line.to_string(),
        conventional_pw: base,
        gated_pw: active_pw + gated_leakage_pw,
        active_pw,
        conventional_leakage_pw,
        gated_leakage_pw,
    })
}

/// Per-line power for one input vector, in the netlist's input order.
///
/// For a conventional netlist both columns carry the conventional power.
pub fn line_power(
    netlist: &GatedNetlist,
    v: &InputVector,
    cal: &LineCalibration,
    supply: &SupplyConfig,
) -> Result<Vec<LinePower>, PowerError> {
    if v.len() != netlist.num_inputs() {
        return Err(PlaError::LengthMismatch {
            expected: netlist.num_inputs(),
            found: v.len(),
        }
        .into());
    }
    supply.validate()?;
    netlist
        .inputs
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let c = cal
                .get(line)
                .ok_or_else(|| PowerError::Uncalibrated(line.clone()))?;
            if !v.bit(i) {
                return Ok(LinePower::idle(line));
            }
            if netlist.variant == Variant::Conventional {
                return split_line(line, &LineCal { gated_scaling: 1.0, ..c.clone() }, 1.0);
            }
            split_line(line, c, line_leakage_ratio(netlist, line, supply.vdd)?)
        })
        .collect()
}

fn saving(conventional_pw: f64, gated_pw: f64) -> f64 {
    if conventional_pw > 0.0 {
        1.0 - gated_pw / conventional_pw
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub vector: InputVector,
    pub line: String,
    pub conventional_pw: f64,
    pub gated_pw: f64,
    pub saving_fraction: f64,
}

impl PowerRow {
    pub fn new(vector: InputVector, line: String, conventional_pw: f64, gated_pw: f64) -> Self {
        PowerRow {
            saving_fraction: saving(conventional_pw, gated_pw),
            vector,
            line,
            conventional_pw,
            gated_pw,
        }
    }
}

/// Row layout for reading reports whose saving column may be absent.
#[derive(Deserialize)]
struct PowerRowIn {
    vector: InputVector,
    line: String,
    conventional_pw: f64,
    gated_pw: f64,
}

/// Conventional vs gated power for every (vector, line) pair.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerReport {
    pub rows: Vec<PowerRow>,
}

impl PowerReport {
    /// Lines in order of first appearance.
    pub fn lines(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        for r in &self.rows {
            if !seen.contains(&r.line) {
                seen.push(r.line.clone());
            }
        }
        seen
    }

    pub fn get(&self, vector: &InputVector, line: &str) -> Option<&PowerRow> {
        self.rows
            .iter()
            .find(|r| &r.vector == vector && r.line == line)
    }

    pub fn conventional(&self) -> PowerTable {
        PowerTable {
            entries: self
                .rows
                .iter()
                .map(|r| PowerEntry {
                    vector: r.vector.clone(),
                    line: r.line.clone(),
                    power_pw: r.conventional_pw,
                })
                .collect(),
        }
    }

    pub fn gated(&self) -> PowerTable {
        PowerTable {
            entries: self
                .rows
                .iter()
                .map(|r| PowerEntry {
                    vector: r.vector.clone(),
                    line: r.line.clone(),
                    power_pw: r.gated_pw,
                })
                .collect(),
        }
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), PowerError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads `vector,line,conventional_pw,gated_pw[,saving_fraction]`; the
    /// saving column, when present, is recomputed.
    pub fn read_csv<R: io::Read>(r: R) -> Result<Self, PowerError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let rows = rdr
            .deserialize::<PowerRowIn>()
            .map(|row| row.map(|r| PowerRow::new(r.vector, r.line, r.conventional_pw, r.gated_pw)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PowerReport { rows })
    }

    pub fn to_json(&self) -> Result<String, PowerError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Power of a single design for every (vector, line) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEntry {
    pub vector: InputVector,
    pub line: String,
    pub power_pw: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerTable {
    pub entries: Vec<PowerEntry>,
}

impl PowerTable {
    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), PowerError> {
        let mut out = csv::Writer::from_writer(w);
        for e in &self.entries {
            out.serialize(e)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: io::Read>(r: R) -> Result<Self, PowerError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let entries = rdr.deserialize().collect::<Result<Vec<PowerEntry>, _>>()?;
        Ok(PowerTable { entries })
    }
}

/// Power of every line for every input vector, vectors in ascending binary
/// order and lines in input order.
pub fn sweep_all_vectors(
    netlist: &GatedNetlist,
    cal: &LineCalibration,
    supply: &SupplyConfig,
) -> Result<PowerReport, PowerError> {
    let vectors: Vec<InputVector> = InputVector::all(netlist.num_inputs())?.collect();
    let per_vector = vectors
        .par_iter()
        .map(|v| line_power(netlist, v, cal, supply))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = vectors
        .into_iter()
        .zip(per_vector)
        .flat_map(|(v, lines)| {
            lines
                .into_iter()
                .map(move |lp| PowerRow::new(v.clone(), lp.line, lp.conventional_pw, lp.gated_pw))
        })
        .collect();
    Ok(PowerReport { rows })
}

/// Fit residual of one reference entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub vector: InputVector,
    pub line: String,
    pub variant: Variant,
    pub reference_pw: f64,
    pub model_pw: f64,
    /// `(model - reference) / reference`; 0 when both are zero.
    pub relative_error: f64,
    /// Excluded from the fit as inconsistent with the rest of its line.
    pub outlier: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub calibration: LineCalibration,
    pub residuals: Vec<Residual>,
}

impl Calibration {
    pub fn outliers(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| r.outlier)
    }

    /// Largest |relative error| among entries that were not flagged.
    pub fn max_inlier_error(&self) -> f64 {
        self.residuals
            .iter()
            .filter(|r| !r.outlier)
            .map(|r| r.relative_error.abs())
            .fold(0.0, f64::max)
    }

    pub fn write_residuals_csv<W: io::Write>(&self, w: W) -> Result<(), PowerError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.residuals {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Flags values further from the median than both three robust standard
/// deviations (scaled median absolute deviation) and the calibration
/// tolerance. Needs at least three values to say anything.
pub fn robust_outliers(values: &[f64]) -> Vec<bool> {
    if values.len() < 3 {
        return vec![false; values.len()];
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let med = median(&sorted);
    let mut dev: Vec<f64> = values.iter().map(|x| (x - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    let spread = MAD_TO_SIGMA * median(&dev);
    values
        .iter()
        .map(|x| {
            let d = (x - med).abs();
            d > OUTLIER_SPREAD_FACTOR * spread && d > CALIBRATION_TOLERANCE * med.abs()
        })
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn relative_error(model: f64, reference: f64) -> f64 {
    if reference != 0.0 {
        (model - reference) / reference
    } else if model == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Fits a line calibration to a reference report.
///
/// The `i`-th line (in order of first appearance) is driven by bit `i` of
/// each vector. Per line, the base power is the mean of the nonzero
/// conventional entries and the gated scaling the mean gated/conventional
/// ratio over rows where both are nonzero; entries flagged by
/// [`robust_outliers`] are left out of both means and reported.
pub fn calibrate(reference: &PowerReport) -> Result<Calibration, PowerError> {
    let lines = reference.lines();
    if lines.is_empty() {
        return Err(PowerError::Calibration("reference is empty".into()));
    }
    if let Some(r) = reference.rows.iter().find(|r| r.vector.len() != lines.len()) {
        return Err(PowerError::Shape(format!(
            "vector {} has {} bits for {} lines",
            r.vector,
            r.vector.len(),
            lines.len()
        )));
    }

    let mut fitted = Vec::new();
    let mut flagged: HashMap<(usize, Variant), bool> = HashMap::new();
    for line in &lines {
        let rows: Vec<(usize, &PowerRow)> = reference
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| &r.line == line)
            .collect();

        let conv: Vec<(usize, f64)> = rows
            .iter()
            .filter(|(_, r)| r.conventional_pw != 0.0)
            .map(|(i, r)| (*i, r.conventional_pw))
            .collect();
        if conv.is_empty() {
            return Err(PowerError::Calibration(format!(
                "line {line} has no nonzero conventional entry"
            )));
        }
        let conv_flags = robust_outliers(&conv.iter().map(|c| c.1).collect::<Vec<_>>());
        for ((i, _), &f) in conv.iter().zip(&conv_flags) {
            flagged.insert((*i, Variant::Conventional), f);
        }
        let base = mean(
            conv.iter()
                .zip(&conv_flags)
                .filter(|(_, &f)| !f)
                .map(|(c, _)| c.1),
        )
        .unwrap_or(0.0);

        let ratios: Vec<(usize, f64)> = rows
            .iter()
            .filter(|(_, r)| r.conventional_pw != 0.0 && r.gated_pw != 0.0)
            .map(|(i, r)| (*i, r.gated_pw / r.conventional_pw))
            .collect();
        if ratios.is_empty() {
            return Err(PowerError::Calibration(format!(
                "line {line} has no row with both designs nonzero"
            )));
        }
        let ratio_flags = robust_outliers(&ratios.iter().map(|c| c.1).collect::<Vec<_>>());
        for ((i, _), &f) in ratios.iter().zip(&ratio_flags) {
            flagged.insert((*i, Variant::PowerGated), f);
        }
        let scaling = mean(
            ratios
                .iter()
                .zip(&ratio_flags)
                .filter(|(_, &f)| !f)
                .map(|(c, _)| c.1),
        )
        .unwrap_or(1.0);

        fitted.push(LineCal {
            line: line.clone(),
            base_pw: base,
            gated_scaling: scaling,
        });
    }
    let calibration = LineCalibration::new(fitted)?;

    let mut residuals = Vec::with_capacity(reference.rows.len() * 2);
    for (i, r) in reference.rows.iter().enumerate() {
        let idx = lines.iter().position(|l| l == &r.line).unwrap_or(0);
        let cal = &calibration.lines[idx];
        let on = r.vector.bit(idx);
        let conv_model = if on { cal.base_pw } else { 0.0 };
        let gated_model = conv_model * cal.gated_scaling;
        for (variant, reference_pw, model_pw) in [
            (Variant::Conventional, r.conventional_pw, conv_model),
            (Variant::PowerGated, r.gated_pw, gated_model),
        ] {
            residuals.push(Residual {
                vector: r.vector.clone(),
                line: r.line.clone(),
                variant,
                reference_pw,
                model_pw,
                relative_error: relative_error(model_pw, reference_pw),
                outlier: flagged.get(&(i, variant)).copied().unwrap_or(false),
            });
        }
    }
    Ok(Calibration {
        calibration,
        residuals,
    })
}

/// Saving statistics of one line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSaving {
    pub line: String,
    /// Rows where the conventional design draws power.
    pub active_rows: usize,
    pub mean_saving: f64,
    pub min_saving: f64,
    pub max_saving: f64,
    /// `1 - sum(gated) / sum(conventional)` over the line.
    pub total_saving: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub lines: Vec<LineSaving>,
    /// `1 - sum(gated) / sum(conventional)` over every row.
    pub total_saving: f64,
}

impl ComparisonSummary {
    pub fn line(&self, name: &str) -> Option<&LineSaving> {
        self.lines.iter().find(|l| l.line == name)
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), PowerError> {
        let mut out = csv::Writer::from_writer(w);
        for l in &self.lines {
            out.serialize(l)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Savings of `gated` against `conventional`, which must cover the same
/// (vector, line) keys.
pub fn compare_designs(
    conventional: &PowerTable,
    gated: &PowerTable,
) -> Result<ComparisonSummary, PowerError> {
    let gated_by_key: BTreeMap<(&InputVector, &str), f64> = gated
        .entries
        .iter()
        .map(|e| ((&e.vector, e.line.as_str()), e.power_pw))
        .collect();
    if gated_by_key.len() != gated.entries.len() {
        return Err(PowerError::Shape("gated report has duplicate keys".into()));
    }
    if conventional.entries.len() != gated.entries.len() {
        return Err(PowerError::Shape(format!(
            "{} conventional rows vs {} gated rows",
            conventional.entries.len(),
            gated.entries.len()
        )));
    }

    let mut order: Vec<&str> = Vec::new();
    let mut per_line: HashMap<&str, Vec<(f64, f64)>> = HashMap::new();
    for e in &conventional.entries {
        let g = *gated_by_key
            .get(&(&e.vector, e.line.as_str()))
            .ok_or_else(|| {
                PowerError::Shape(format!("gated report lacks ({}, {})", e.vector, e.line))
            })?;
        if !per_line.contains_key(e.line.as_str()) {
            order.push(&e.line);
        }
        per_line.entry(&e.line).or_default().push((e.power_pw, g));
    }

    let (mut all_c, mut all_g) = (0.0, 0.0);
    let lines = order
        .into_iter()
        .map(|line| {
            let pairs = &per_line[line];
            let sum_c: f64 = pairs.iter().map(|p| p.0).sum();
            let sum_g: f64 = pairs.iter().map(|p| p.1).sum();
            all_c += sum_c;
            all_g += sum_g;
            let savings: Vec<f64> = pairs
                .iter()
                .filter(|(c, _)| *c > 0.0)
                .map(|&(c, g)| saving(c, g))
                .collect();
            LineSaving {
                line: line.to_string(),
                active_rows: savings.len(),
                mean_saving: mean(savings.iter().copied()).unwrap_or(0.0),
                min_saving: savings.iter().copied().reduce(f64::min).unwrap_or(0.0),
                max_saving: savings.iter().copied().reduce(f64::max).unwrap_or(0.0),
                total_saving: saving(sum_c, sum_g),
            }
        })
        .collect();
    Ok(ComparisonSummary {
        lines,
        total_saving: saving(all_c, all_g),
    })
}
