// SPDX-License-Identifier: Apache-2.0

//! Fixed-step transient response of single-pole RC stages.
//!
//! Each node is a lumped RC: `dV/dt = (V_target - V) / (R C)`, integrated
//! with forward Euler. In the gated design the footer adds its on-resistance
//! in series with the driver.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{virtual_ground_closed_form, DeviceError};
use crate::netlist::{SleepDomain, SleepMode};

/// Default footer resistance of a unit-width footer, ohms.
pub const DEFAULT_R_UNIT: f64 = 10e3;
/// Default wake-up horizon, in time constants.
pub const WAKEUP_HORIZON_TAUS: f64 = 50.0;
/// Default wake-up integration step, in time constants.
pub const WAKEUP_STEP_TAUS: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransientError {
    #[error("{0}")]
    InvalidStage(String),
    #[error("timestep {timestep} s exceeds the maximum of {max_timestep} s ({reason})")]
    Stability {
        timestep: f64,
        max_timestep: f64,
        reason: &'static str,
    },
    #[error("threshold fraction {0} must lie strictly between 0 and 1")]
    Threshold(f64),
    #[error("sleep domain {0} must be in sleep mode before wake-up")]
    NotAsleep(String),
    #[error("node did not fall below {threshold} V within {duration} s (final {final_voltage} V)")]
    Timeout {
        threshold: f64,
        duration: f64,
        final_voltage: f64,
    },
    #[error(transparent)]
    Device(#[from] DeviceError),
}

/// Footer on-resistance, `r_unit / w_footer`.
pub fn footer_resistance(r_unit: f64, w_footer: f64) -> f64 {
    r_unit / w_footer
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcStage {
    pub drive_resistance: f64,
    /// Series footer resistance of the gated design.
    pub footer_resistance: Option<f64>,
    pub capacitance: f64,
    pub initial_voltage: f64,
    pub target_voltage: f64,
}

impl RcStage {
    pub fn conventional(r: f64, c: f64, v0: f64, target: f64) -> Self {
        RcStage {
            drive_resistance: r,
            footer_resistance: None,
            capacitance: c,
            initial_voltage: v0,
            target_voltage: target,
        }
    }

    pub fn gated(r: f64, r_footer: f64, c: f64, v0: f64, target: f64) -> Self {
        RcStage {
            footer_resistance: Some(r_footer),
            ..RcStage::conventional(r, c, v0, target)
        }
    }

    pub fn total_resistance(&self) -> f64 {
        self.drive_resistance + self.footer_resistance.unwrap_or(0.0)
    }

    pub fn time_constant(&self) -> f64 {
        self.total_resistance() * self.capacitance
    }

    pub fn validate(&self) -> Result<(), TransientError> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.drive_resistance) {
            return Err(TransientError::InvalidStage("drive resistance must be positive".into()));
        }
        if let Some(r) = self.footer_resistance {
            if !positive(r) {
                return Err(TransientError::InvalidStage(
                    "footer resistance must be positive".into(),
                ));
            }
        }
        if !positive(self.capacitance) {
            return Err(TransientError::InvalidStage("capacitance must be positive".into()));
        }
        if !(self.initial_voltage.is_finite() && self.target_voltage.is_finite()) {
            return Err(TransientError::InvalidStage("voltages must be finite".into()));
        }
        Ok(())
    }

    /// Exact step response at time `t`.
    pub fn analytic(&self, t: f64) -> f64 {
        self.target_voltage
            + (self.initial_voltage - self.target_voltage) * (-t / self.time_constant()).exp()
    }

    /// Largest timestep `simulate_step` accepts for a run of `duration`.
    pub fn max_timestep(&self, duration: f64) -> f64 {
        (duration / 10.0).min(self.time_constant() / 10.0)
    }

    /// Upper bound on the forward-Euler error at time `t` with step `h`:
    /// `|dV| * (t / tau) * (h / tau) / 2`.
    pub fn euler_error_bound(&self, t: f64, h: f64) -> f64 {
        let tau = self.time_constant();
        (self.target_voltage - self.initial_voltage).abs() * (t / tau) * (h / tau) / 2.0
    }
}

/// Uniformly sampled node voltage; sample `i` is at `i * timestep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub node: String,
    pub timestep: f64,
    pub samples: Vec<f64>,
}

impl Waveform {
    pub fn with_node(mut self, node: impl Into<String>) -> Self {
        self.node = node.into();
        self
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.timestep
    }

    pub fn last(&self) -> f64 {
        *self.samples.last().expect("waveform has samples")
    }

    /// First time the waveform reaches `level`, linearly interpolated
    /// between samples. `None` if it never does.
    pub fn crossing_time(&self, level: f64) -> Option<f64> {
        let first = self.samples[0];
        if first == level {
            return Some(0.0);
        }
        let rising = level > first;
        self.samples.windows(2).enumerate().find_map(|(i, w)| {
            let reached = if rising { w[1] >= level } else { w[1] <= level };
            reached.then(|| {
                let frac = if w[1] == w[0] { 1.0 } else { (level - w[0]) / (w[1] - w[0]) };
                (i as f64 + frac) * self.timestep
            })
        })
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["time_s", "voltage_v"])?;
        for (i, v) in self.samples.iter().enumerate() {
            out.write_record([self.time(i).to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Number of steps covering `duration`.
fn step_count(duration: f64, timestep: f64) -> usize {
    let ratio = duration / timestep;
    let n = ratio.round();
    if (ratio - n).abs() < 1e-9 * ratio.max(1.0) {
        n as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Integrates the stage's step response over `duration` with a fixed step.
///
/// Refuses steps above a tenth of the duration or of the time constant.
pub fn simulate_step(stage: &RcStage, duration: f64, timestep: f64) -> Result<Waveform, TransientError> {
    stage.validate()?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(TransientError::InvalidStage("duration must be positive".into()));
    }
    if !(timestep > 0.0 && timestep.is_finite()) {
        return Err(TransientError::InvalidStage("timestep must be positive".into()));
    }
    let tau = stage.time_constant();
    if timestep > duration / 10.0 {
        return Err(TransientError::Stability {
            timestep,
            max_timestep: stage.max_timestep(duration),
            reason: "at most a tenth of the duration",
        });
    }
    if timestep > tau / 10.0 {
        return Err(TransientError::Stability {
            timestep,
            max_timestep: stage.max_timestep(duration),
            reason: "at most a tenth of the RC time constant",
        });
    }
    let n = step_count(duration, timestep);
    let k = timestep / tau;
    let mut v = stage.initial_voltage;
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(v);
    for _ in 0..n {
        v += k * (stage.target_voltage - v);
        samples.push(v);
    }
    Ok(Waveform {
        node: String::new(),
        timestep,
        samples,
    })
}

/// Electrical parameters of a virtual-ground node during wake-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WakeupParams {
    pub vdd: f64,
    /// Footer on-resistance of a unit-width footer, ohms.
    pub r_unit: f64,
    /// Virtual-ground node capacitance, farads.
    pub capacitance: f64,
    /// Integration step; a thousandth of the time constant when absent.
    pub timestep: Option<f64>,
    /// Give-up time; fifty time constants when absent.
    pub max_duration: Option<f64>,
}

/// Time for a sleeping domain's virtual ground to discharge through its
/// footer to `threshold_fraction` of its sleep-mode voltage once the footer
/// turns on.
pub fn wakeup_latency(
    domain: &SleepDomain,
    params: &WakeupParams,
    threshold_fraction: f64,
) -> Result<f64, TransientError> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(TransientError::Threshold(threshold_fraction));
    }
    if domain.mode != SleepMode::Sleep {
        return Err(TransientError::NotAsleep(domain.name.clone()));
    }
    let vgnd = virtual_ground_closed_form(&domain.footer, params.vdd)?.clamped;
    if vgnd == 0.0 {
        return Ok(0.0);
    }
    let r = footer_resistance(params.r_unit, domain.footer.w_footer);
    let stage = RcStage::conventional(r, params.capacitance, vgnd, 0.0);
    stage.validate()?;
    let tau = stage.time_constant();
    let h = params.timestep.unwrap_or(tau * WAKEUP_STEP_TAUS);
    let duration = params.max_duration.unwrap_or(tau * WAKEUP_HORIZON_TAUS);
    let wave = simulate_step(&stage, duration, h)?;
    let threshold = threshold_fraction * vgnd;
    wave.crossing_time(threshold)
        .ok_or(TransientError::Timeout {
            threshold,
            duration,
            final_voltage: wave.last(),
        })
}
