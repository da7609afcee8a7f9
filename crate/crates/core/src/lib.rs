// SPDX-License-Identifier: Apache-2.0

//! Design and analysis of power-gated programmable logic arrays.
//!
//! - [`pla`]: `.pla` personalities, parsing and evaluation.
//! - [`device`]: subthreshold leakage, footer virtual ground, leakage
//!   saving and average power.
//! - [`netlist`]: gate-level synthesis with footer sleep domains.
//! - [`power`]: per-vector line power, calibration and design comparison.
//! - [`transient`]: RC step response and wake-up latency.

pub mod device;
pub mod fixtures;
pub mod netlist;
pub mod pla;
pub mod power;
pub mod transient;

pub use device::{DeviceParams, FooterConfig, SupplyConfig};
pub use netlist::{synthesize, GatedNetlist, SleepMode, Variant};
pub use pla::{parse_pla, InputVector, PlaPersonality};
pub use power::{calibrate, compare_designs, sweep_all_vectors, LineCalibration, PowerReport};
pub use transient::{simulate_step, wakeup_latency, RcStage, Waveform};
