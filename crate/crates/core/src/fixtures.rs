// SPDX-License-Identifier: Apache-2.0

//! Reference data bundled with the toolkit.

use crate::pla::{parse_pla, PlaPersonality};
use crate::power::PowerReport;

/// Per-line power of a conventional and a footer-gated 3-input PLA for all
/// eight input vectors, picowatts (`vector,line,conventional_pw,gated_pw`).
pub const TABLE1_CSV: &str = include_str!("../fixtures/table1.csv");

/// 3-input PLA with all eight minterms feeding a single output.
pub const THREE_INPUT_MINTERMS_PLA: &str = include_str!("../fixtures/three_input_minterms.pla");

pub fn table1() -> PowerReport {
    PowerReport::read_csv(TABLE1_CSV.as_bytes()).expect("bundled table parses")
}

pub fn three_input_minterms() -> PlaPersonality {
    parse_pla(THREE_INPUT_MINTERMS_PLA).expect("bundled PLA parses")
}
