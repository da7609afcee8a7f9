// SPDX-License-Identifier: Apache-2.0

//! Subthreshold device analytics for footer-gated logic.
//!
//! All quantities are SI: amperes, volts, farads, hertz, watts. The
//! subthreshold slope is in volts per decade of drain current.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Iteration cap for the bisection solver.
pub const BISECTION_MAX_ITERATIONS: usize = 200;
/// Bracket width at which bisection stops.
pub const BISECTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error("{key} must be {requirement}")]
    Invalid { key: String, requirement: String },
    #[error("eta must be positive: the virtual-ground solution is singular at eta = 0")]
    SingularEta,
    #[error(
        "no virtual-ground solution in [0, {vdd}] V: residual is {residual_low} at 0 V and {residual_high} at {vdd} V"
    )]
    NoSolution {
        vdd: f64,
        residual_low: f64,
        residual_high: f64,
    },
    #[error("virtual-ground voltage {vgnd} V outside [0, {vdd}] V")]
    Domain { vgnd: f64, vdd: f64 },
}

fn invalid(key: &str, requirement: &str) -> DeviceError {
    DeviceError::Invalid {
        key: key.to_string(),
        requirement: requirement.to_string(),
    }
}

fn require(ok: bool, key: &str, requirement: &str) -> Result<(), DeviceError> {
    if ok {
        Ok(())
    } else {
        Err(invalid(key, requirement))
    }
}

/// Subthreshold model constants of one transistor (or lumped device).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Current scale `I_o`, amperes.
    pub i0: f64,
    pub w_over_l: f64,
    /// Threshold voltage, volts.
    pub vth: f64,
    /// DIBL coefficient.
    pub eta: f64,
    /// Subthreshold slope, volts per decade.
    pub ss: f64,
}

impl DeviceParams {
    /// Low-threshold logic device.
    pub const DEFAULT_LOGIC: DeviceParams = DeviceParams {
        i0: 100e-9,
        w_over_l: 1.0,
        vth: 0.3,
        eta: 0.15,
        ss: 0.1,
    };

    /// High-threshold footer device.
    pub const DEFAULT_FOOTER: DeviceParams = DeviceParams {
        vth: 0.5,
        ..DeviceParams::DEFAULT_LOGIC
    };

    /// Checks the parameter invariants, naming offending fields with `suffix`
    /// appended (so footer fields read `eta_footer`, etc.).
    pub fn validate_named(&self, suffix: &str) -> Result<(), DeviceError> {
        let key = |k: &str| format!("{k}{suffix}");
        require(self.i0 > 0.0 && self.i0.is_finite(), &key("i0"), "positive")?;
        require(
            self.w_over_l > 0.0 && self.w_over_l.is_finite(),
            &key("w_over_l"),
            "positive",
        )?;
        require(self.vth >= 0.0 && self.vth.is_finite(), &key("vth"), "non-negative")?;
        require(self.eta > 0.0, &key("eta"), "positive")?;
        require(self.eta < 1.0, &key("eta"), "below 1")?;
        require(self.ss > 0.0 && self.ss.is_finite(), &key("ss"), "positive")?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        self.validate_named("")
    }
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams::DEFAULT_LOGIC
    }
}

/// Supply and switching conditions for the average-power decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupplyConfig {
    pub vdd: f64,
    pub f_clk: f64,
    pub c_load: f64,
    /// Probability of a power-consuming 0 -> 1 transition per cycle.
    pub alpha: f64,
    /// Short-circuit current, amperes.
    pub i_sc: f64,
}

impl SupplyConfig {
    pub fn validate(&self) -> Result<(), DeviceError> {
        require(self.vdd > 0.0 && self.vdd.is_finite(), "vdd", "positive")?;
        require(self.f_clk >= 0.0 && self.f_clk.is_finite(), "f_clk", "non-negative")?;
        require(self.c_load >= 0.0 && self.c_load.is_finite(), "c_load", "non-negative")?;
        require((0.0..=1.0).contains(&self.alpha), "alpha", "within [0, 1]")?;
        require(self.i_sc >= 0.0 && self.i_sc.is_finite(), "i_sc", "non-negative")?;
        Ok(())
    }
}

impl Default for SupplyConfig {
    fn default() -> Self {
        SupplyConfig {
            vdd: 5.0,
            f_clk: 1e6,
            c_load: 10e-15,
            alpha: 0.5,
            i_sc: 0.0,
        }
    }
}

/// A footer sleep transistor below a block of logic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FooterConfig {
    /// Effective width of the gated logic, same units as `w_footer`.
    pub w_circuit: f64,
    pub w_footer: f64,
    /// Footer gate voltage during sleep, volts.
    pub vg: f64,
    pub circuit: DeviceParams,
    pub footer: DeviceParams,
}

impl Default for FooterConfig {
    fn default() -> Self {
        FooterConfig {
            w_circuit: 1.0,
            w_footer: 1.0,
            vg: 0.0,
            circuit: DeviceParams::DEFAULT_LOGIC,
            footer: DeviceParams::DEFAULT_FOOTER,
        }
    }
}

impl FooterConfig {
    pub fn validate(&self) -> Result<(), DeviceError> {
        self.circuit.validate_named("")?;
        self.footer.validate_named("_footer")?;
        require(
            self.w_circuit > 0.0 && self.w_circuit.is_finite(),
            "w_circuit",
            "positive",
        )?;
        require(
            self.w_footer > 0.0 && self.w_footer.is_finite(),
            "w_footer",
            "positive",
        )?;
        require(
            self.vg.is_finite() && self.vg < self.footer.vth,
            "vg",
            "below vth_footer (footer in weak inversion)",
        )?;
        Ok(())
    }

    /// Lumped off-transistor of the logic block as seen by the leakage
    /// balance: shares the footer's current scale, DIBL and slope and is
    /// sized by `w_circuit` against the same channel length.
    fn balance_circuit_device(&self) -> DeviceParams {
        DeviceParams {
            w_over_l: self.w_circuit,
            vth: self.circuit.vth,
            ..self.footer
        }
    }

    fn balance_footer_device(&self) -> DeviceParams {
        DeviceParams {
            w_over_l: self.w_footer,
            ..self.footer
        }
    }
}

/// Subthreshold drain current `I_o (W/L) 10^((vg - vth + eta vds) / ss)`.
pub fn subthreshold_leakage(d: &DeviceParams, vg: f64, vds: f64) -> Result<f64, DeviceError> {
    d.validate()?;
    require(vds >= 0.0 && vds.is_finite(), "vds", "non-negative")?;
    require(vg.is_finite(), "vg", "finite")?;
    Ok(d.i0 * d.w_over_l * 10f64.powf((vg - d.vth + d.eta * vds) / d.ss))
}

/// Virtual-ground voltage as solved, and limited to the physical range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualGround {
    pub raw: f64,
    /// `raw` limited to `[0, vdd]`.
    pub clamped: f64,
}

fn check_footer_and_supply(f: &FooterConfig, vdd: f64) -> Result<(), DeviceError> {
    if f.footer.eta == 0.0 {
        return Err(DeviceError::SingularEta);
    }
    f.validate()?;
    require(vdd > 0.0 && vdd.is_finite(), "vdd", "positive")
}

/// Sleep-mode virtual-ground voltage from the closed-form leakage balance
///
/// `V_gnd = (-V_g + SS log10(W_circuit / W_footer) + V_thF - V_thc + eta V_dd) / (2 eta)`
///
/// with the footer's `eta` and `SS` used for both devices.
pub fn virtual_ground_closed_form(f: &FooterConfig, vdd: f64) -> Result<VirtualGround, DeviceError> {
    check_footer_and_supply(f, vdd)?;
    let eta = f.footer.eta;
    let raw = (-f.vg
        + f.footer.ss * (f.w_circuit / f.w_footer).log10()
        + (f.footer.vth - f.circuit.vth + eta * vdd))
        / (2.0 * eta);
    Ok(VirtualGround {
        raw,
        clamped: raw.clamp(0.0, vdd),
    })
}

/// Leakage-balance residual at a trial virtual-ground voltage, in decades:
/// `log10(I_circuit) - log10(I_footer)`. Strictly decreasing in `vgnd`.
pub fn leakage_balance_residual(f: &FooterConfig, vdd: f64, vgnd: f64) -> Result<f64, DeviceError> {
    let circuit = subthreshold_leakage(&f.balance_circuit_device(), 0.0, vdd - vgnd)?;
    let footer = subthreshold_leakage(&f.balance_footer_device(), f.vg, vgnd)?;
    Ok(circuit.log10() - footer.log10())
}

/// Sleep-mode virtual-ground voltage found by bisection on the leakage
/// balance over `[0, vdd]`.
pub fn virtual_ground_numeric(f: &FooterConfig, vdd: f64) -> Result<f64, DeviceError> {
    check_footer_and_supply(f, vdd)?;
    let (mut lo, mut hi) = (0.0, vdd);
    let r_lo = leakage_balance_residual(f, vdd, lo)?;
    let r_hi = leakage_balance_residual(f, vdd, hi)?;
    if r_lo == 0.0 {
        return Ok(lo);
    }
    if r_hi == 0.0 {
        return Ok(hi);
    }
    if r_lo.signum() == r_hi.signum() {
        return Err(DeviceError::NoSolution {
            vdd,
            residual_low: r_lo,
            residual_high: r_hi,
        });
    }
    for _ in 0..BISECTION_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECTION_TOLERANCE || mid <= lo || mid >= hi {
            break;
        }
        let r = leakage_balance_residual(f, vdd, mid)?;
        if r == 0.0 {
            return Ok(mid);
        }
        if r.signum() == r_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sleep-to-active leakage ratio `10^(-eta (V_dd - V_gnd) / SS)`.
///
/// Taken literally, the ratio grows towards 1 as the virtual ground rises,
/// i.e. a higher `V_gnd` means a *smaller* leakage saving. This is what is
/// computed here.
pub fn leakage_saving_ratio(f: &FooterConfig, vdd: f64, vgnd: f64) -> Result<f64, DeviceError> {
    f.footer.validate_named("_footer")?;
    require(vdd > 0.0 && vdd.is_finite(), "vdd", "positive")?;
    if !(0.0..=vdd).contains(&vgnd) {
        return Err(DeviceError::Domain { vgnd, vdd });
    }
    Ok(10f64.powf(-f.footer.eta * (vdd - vgnd) / f.footer.ss))
}

/// Average power split into its switching, short-circuit and leakage parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown {
    pub switching: f64,
    pub short_circuit: f64,
    pub leakage: f64,
}

impl PowerBreakdown {
    pub fn total(&self) -> f64 {
        self.switching + self.short_circuit + self.leakage
    }
}

/// `alpha C V_dd^2 f + I_sc V_dd + I_leak V_dd`.
pub fn average_power(s: &SupplyConfig, i_leak: f64) -> Result<PowerBreakdown, DeviceError> {
    s.validate()?;
    require(i_leak >= 0.0 && i_leak.is_finite(), "i_leak", "non-negative")?;
    Ok(PowerBreakdown {
        switching: s.alpha * s.c_load * s.vdd * s.vdd * s.f_clk,
        short_circuit: s.i_sc * s.vdd,
        leakage: i_leak * s.vdd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn footer(w_ratio: f64, vth_c: f64, vth_f: f64, vg: f64) -> FooterConfig {
        FooterConfig {
            w_circuit: w_ratio,
            w_footer: 1.0,
            vg,
            circuit: DeviceParams {
                vth: vth_c,
                ..DeviceParams::DEFAULT_LOGIC
            },
            footer: DeviceParams {
                vth: vth_f,
                ..DeviceParams::DEFAULT_LOGIC
            },
        }
    }

    #[test]
    fn leakage_at_threshold_is_scale() {
        let d = DeviceParams {
            i0: 100e-9,
            w_over_l: 2.0,
            vth: 0.3,
            eta: 0.15,
            ss: 0.1,
        };
        assert_eq!(subthreshold_leakage(&d, 0.3, 0.0).unwrap(), 200e-9);
    }

    #[test]
    fn leakage_worked_value() {
        let d = DeviceParams {
            i0: 100e-9,
            w_over_l: 2.0,
            vth: 0.3,
            eta: 0.15,
            ss: 0.1,
        };
        // 200 nA * 10^-1.5, evaluated independently
        let i = subthreshold_leakage(&d, 0.0, 1.0).unwrap();
        assert!((i - 6.324_555_320_336_759e-9).abs() < 1e-20, "{i}");
        let doubled = DeviceParams { w_over_l: 4.0, ..d };
        assert!((subthreshold_leakage(&doubled, 0.0, 1.0).unwrap() - 2.0 * i).abs() < 1e-22);
    }

    #[test]
    fn leakage_rejects_bad_inputs() {
        let d = DeviceParams::DEFAULT_LOGIC;
        assert!(subthreshold_leakage(&d, 0.0, -0.1).is_err());
        let bad = DeviceParams { eta: 0.0, ..d };
        assert_eq!(
            subthreshold_leakage(&bad, 0.0, 0.1).unwrap_err().to_string(),
            "eta must be positive"
        );
        let bad = DeviceParams { eta: 1.0, ..d };
        assert!(bad.validate().is_err());
        let bad = DeviceParams { ss: 0.0, ..d };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn symmetric_footer_sits_at_half_supply() {
        let f = footer(1.0, 0.3, 0.3, 0.0);
        let vg = virtual_ground_closed_form(&f, 1.0).unwrap();
        assert!((vg.raw - 0.5).abs() < 1e-15);
        assert_eq!(vg.raw, vg.clamped);
        let n = virtual_ground_numeric(&f, 1.0).unwrap();
        assert!((n - 0.5).abs() < 1e-9);
    }

    #[test]
    fn width_ratio_ten_example() {
        let f = footer(10.0, 0.3, 0.3, 0.0);
        let closed = virtual_ground_closed_form(&f, 1.0).unwrap().raw;
        // (0.1 * 1 + 0.15) / 0.3
        assert!((closed - 0.833_333_333_333_333_4).abs() < 1e-12, "{closed}");
        let numeric = virtual_ground_numeric(&f, 1.0).unwrap();
        assert!((closed - numeric).abs() < 1e-9);
    }

    #[test]
    fn gate_voltage_slope() {
        let f = footer(3.0, 0.3, 0.5, 0.0);
        let a = virtual_ground_closed_form(&f, 1.0).unwrap().raw;
        let b = virtual_ground_closed_form(&FooterConfig { vg: 0.1, ..f }, 1.0)
            .unwrap()
            .raw;
        assert!(((b - a) - (-0.1 / 0.3)).abs() < 1e-12);
    }

    #[test]
    fn clamps_above_supply() {
        // large threshold gap pushes the solution past vdd
        let f = footer(1.0, 0.1, 0.9, -0.3);
        let v = virtual_ground_closed_form(&f, 0.5).unwrap();
        assert!(v.raw > 0.5);
        assert_eq!(v.clamped, 0.5);
        match virtual_ground_numeric(&f, 0.5) {
            Err(DeviceError::NoSolution {
                residual_low,
                residual_high,
                ..
            }) => assert!(residual_low > 0.0 && residual_high > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn weak_inversion_and_eta_checks() {
        let f = footer(1.0, 0.3, 0.5, 0.5);
        assert!(matches!(
            virtual_ground_closed_form(&f, 1.0),
            Err(DeviceError::Invalid { key, .. }) if key == "vg"
        ));
        let mut f = footer(1.0, 0.3, 0.5, 0.0);
        f.footer.eta = 0.0;
        assert_eq!(
            virtual_ground_closed_form(&f, 1.0),
            Err(DeviceError::SingularEta)
        );
        f.footer.eta = 0.15;
        f.w_footer = 0.0;
        assert!(virtual_ground_numeric(&f, 1.0).is_err());
    }

    #[test]
    fn saving_ratio_values() {
        let f = footer(1.0, 0.3, 0.3, 0.0);
        assert_eq!(leakage_saving_ratio(&f, 1.0, 1.0).unwrap(), 1.0);
        let r0 = leakage_saving_ratio(&f, 1.0, 0.0).unwrap();
        assert!((r0 - 0.031_622_776_601_683_79).abs() < 1e-15);
        let r = leakage_saving_ratio(&f, 1.0, 0.8333).unwrap();
        assert!((r - 0.562_276_586_979_423_7).abs() < 1e-9, "{r}");
        assert!(matches!(
            leakage_saving_ratio(&f, 1.0, 1.2),
            Err(DeviceError::Domain { .. })
        ));
        assert!(leakage_saving_ratio(&f, 1.0, -0.01).is_err());
    }

    #[test]
    fn average_power_components() {
        let zero = SupplyConfig {
            vdd: 5.0,
            f_clk: 1e6,
            c_load: 10e-15,
            alpha: 0.0,
            i_sc: 0.0,
        };
        let p = average_power(&zero, 0.0).unwrap();
        assert_eq!(p.total(), 0.0);

        let s = SupplyConfig { alpha: 1.0, ..zero };
        let p = average_power(&s, 0.0).unwrap();
        assert!((p.switching - 250e-9).abs() < 1e-21);
        assert_eq!(p.short_circuit, 0.0);

        let p = average_power(&SupplyConfig { i_sc: 1e-6, ..s }, 2e-9).unwrap();
        assert!((p.short_circuit - 5e-6).abs() < 1e-18);
        assert!((p.leakage - 10e-9).abs() < 1e-21);
        assert!(average_power(&s, -1.0).is_err());
        assert!(average_power(&SupplyConfig { alpha: 1.5, ..s }, 0.0).is_err());
    }
}
