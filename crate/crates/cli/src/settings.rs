// SPDX-License-Identifier: Apache-2.0

//! Flat run settings, shared by the config file and the command line.
//!
//! Every key can be given in a TOML config file (`--config`) or as a flag
//! of the same name; flags win.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use mtpla::device::{DeviceParams, FooterConfig, SupplyConfig};
use mtpla::netlist::{DomainLayout, SynthOptions};
use mtpla::transient::DEFAULT_R_UNIT;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[command(rename_all = "snake_case")]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// TOML file with any of the keys below
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// `.pla` input (defaults to the bundled 3-input, 8-minterm PLA)
    #[arg(long)]
    pub pla: Option<PathBuf>,
    /// Reference power CSV: vector,line,conventional_pw,gated_pw
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// `table` (fit to a reference CSV) or `model` (device equations)
    #[arg(long)]
    pub calibration_mode: Option<String>,
    /// Output directory for `sweep`, `compare` and `transient` files
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Reference report for `compare`
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Single-design CSV (vector,line,power_pw) for `compare`
    #[arg(long)]
    pub conventional: Option<PathBuf>,
    #[arg(long)]
    pub gated: Option<PathBuf>,
    /// Input vector for `power`, first input first, e.g. 101
    #[arg(long)]
    pub vector: Option<String>,
    /// Net to simulate in `transient`; repeatable, defaults to all outputs
    #[arg(long)]
    pub node: Option<Vec<String>>,

    /// Logic-device current scale, A
    #[arg(long)]
    pub i0: Option<f64>,
    #[arg(long)]
    pub w_over_l: Option<f64>,
    /// Logic threshold voltage, V
    #[arg(long)]
    pub vth: Option<f64>,
    /// DIBL coefficient
    #[arg(long)]
    pub eta: Option<f64>,
    /// Subthreshold slope, V/decade
    #[arg(long)]
    pub ss: Option<f64>,
    #[arg(long)]
    pub i0_footer: Option<f64>,
    #[arg(long)]
    pub w_over_l_footer: Option<f64>,
    /// Footer threshold voltage, V
    #[arg(long)]
    pub vth_footer: Option<f64>,
    #[arg(long)]
    pub eta_footer: Option<f64>,
    #[arg(long)]
    pub ss_footer: Option<f64>,
    /// Footer gate voltage in sleep, V
    #[arg(long)]
    pub vg: Option<f64>,
    #[arg(long)]
    pub w_circuit: Option<f64>,
    #[arg(long)]
    pub w_footer: Option<f64>,

    /// Supply voltage, V
    #[arg(long)]
    pub vdd: Option<f64>,
    #[arg(long)]
    pub f_clk: Option<f64>,
    #[arg(long)]
    pub c_load: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub i_sc: Option<f64>,

    #[arg(long)]
    pub unit_width: Option<f64>,
    /// `per_array` or `shared`
    #[arg(long)]
    pub domain_layout: Option<String>,

    /// Footer resistance at unit width, ohm
    #[arg(long)]
    pub r_unit: Option<f64>,
    /// Node drive resistance, ohm
    #[arg(long)]
    pub r_drive: Option<f64>,
    /// Node capacitance, F
    #[arg(long)]
    pub c_node: Option<f64>,
    /// Virtual-ground capacitance, F
    #[arg(long)]
    pub c_vgnd: Option<f64>,
    /// Simulated time, s
    #[arg(long)]
    pub duration: Option<f64>,
    /// Integration step, s
    #[arg(long)]
    pub timestep: Option<f64>,
    #[arg(long)]
    pub threshold_fraction: Option<f64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field; } )*
    };
}

impl Settings {
    /// Fills unset flags from the config file, if one was given.
    pub fn resolve(mut self) -> Result<Settings, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
        let file: Settings = toml::from_str(&text)
            .map_err(|e| CliError::User(format!("{}: {}", path.display(), e.message())))?;
        overlay!(self, file;
            pla, calibration, calibration_mode, out_dir, reference, conventional, gated,
            vector, node,
            i0, w_over_l, vth, eta, ss, i0_footer, w_over_l_footer, vth_footer, eta_footer,
            ss_footer, vg, w_circuit, w_footer, vdd, f_clk, c_load, alpha, i_sc,
            unit_width, domain_layout, r_unit, r_drive, c_node, c_vgnd, duration, timestep,
            threshold_fraction);
        Ok(self)
    }

    fn circuit_device(&self) -> DeviceParams {
        let d = DeviceParams::DEFAULT_LOGIC;
        DeviceParams {
            i0: self.i0.unwrap_or(d.i0),
            w_over_l: self.w_over_l.unwrap_or(d.w_over_l),
            vth: self.vth.unwrap_or(d.vth),
            eta: self.eta.unwrap_or(d.eta),
            ss: self.ss.unwrap_or(d.ss),
        }
    }

    fn footer_device(&self) -> DeviceParams {
        let c = self.circuit_device();
        DeviceParams {
            i0: self.i0_footer.unwrap_or(c.i0),
            w_over_l: self.w_over_l_footer.unwrap_or(c.w_over_l),
            vth: self.vth_footer.unwrap_or(DeviceParams::DEFAULT_FOOTER.vth),
            eta: self.eta_footer.unwrap_or(c.eta),
            ss: self.ss_footer.unwrap_or(c.ss),
        }
    }

    pub fn footer(&self) -> Result<FooterConfig, CliError> {
        let d = FooterConfig::default();
        let f = FooterConfig {
            w_circuit: self.w_circuit.unwrap_or(d.w_circuit),
            w_footer: self.w_footer.unwrap_or(d.w_footer),
            vg: self.vg.unwrap_or(d.vg),
            circuit: self.circuit_device(),
            footer: self.footer_device(),
        };
        f.validate().map_err(|e| CliError::User(e.to_string()))?;
        Ok(f)
    }

    pub fn supply(&self) -> Result<SupplyConfig, CliError> {
        let d = SupplyConfig::default();
        let s = SupplyConfig {
            vdd: self.vdd.unwrap_or(d.vdd),
            f_clk: self.f_clk.unwrap_or(d.f_clk),
            c_load: self.c_load.unwrap_or(d.c_load),
            alpha: self.alpha.unwrap_or(d.alpha),
            i_sc: self.i_sc.unwrap_or(d.i_sc),
        };
        s.validate().map_err(|e| CliError::User(e.to_string()))?;
        Ok(s)
    }

    pub fn synth_options(&self) -> Result<SynthOptions, CliError> {
        let layout = match self.domain_layout.as_deref() {
            None | Some("per_array") => DomainLayout::PerArray,
            Some("shared") => DomainLayout::Shared,
            Some(other) => {
                return Err(CliError::User(format!(
                    "domain_layout must be per_array or shared, got \"{other}\""
                )))
            }
        };
        let unit_width = positive("unit_width", self.unit_width, 1.0)?;
        Ok(SynthOptions { layout, unit_width })
    }

    pub fn r_unit(&self) -> Result<f64, CliError> {
        positive("r_unit", self.r_unit, DEFAULT_R_UNIT)
    }

    pub fn r_drive(&self) -> Result<f64, CliError> {
        positive("r_drive", self.r_drive, 10e3)
    }

    pub fn c_node(&self) -> Result<f64, CliError> {
        positive("c_node", self.c_node, 100e-12)
    }

    pub fn c_vgnd(&self) -> Result<f64, CliError> {
        positive("c_vgnd", self.c_vgnd, 100e-12)
    }

    pub fn duration(&self) -> Result<f64, CliError> {
        positive("duration", self.duration, 10e-6)
    }

    pub fn timestep(&self) -> Result<f64, CliError> {
        positive("timestep", self.timestep, 10e-9)
    }

    pub fn threshold_fraction(&self) -> Result<f64, CliError> {
        let t = self.threshold_fraction.unwrap_or(0.5);
        if t > 0.0 && t < 1.0 {
            Ok(t)
        } else {
            Err(CliError::User(format!(
                "threshold_fraction must lie strictly between 0 and 1, got {t}"
            )))
        }
    }

    pub fn out_dir(&self) -> Result<&Path, CliError> {
        self.out_dir
            .as_deref()
            .ok_or_else(|| CliError::User("out_dir is required".into()))
    }
}

fn positive(key: &str, value: Option<f64>, default: f64) -> Result<f64, CliError> {
    let v = value.unwrap_or(default);
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::User(format!("{key} must be positive, got {v}")))
    }
}
