// SPDX-License-Identifier: Apache-2.0

use mtpla::device::FooterConfig;
use mtpla::netlist::{SleepDomain, SleepMode};
use mtpla::transient::{simulate_step, wakeup_latency, RcStage, WakeupParams, DEFAULT_R_UNIT};
use proptest::prelude::*;

fn max_error(stage: &RcStage, duration: f64, h: f64) -> f64 {
    let w = simulate_step(stage, duration, h).unwrap();
    w.samples
        .iter()
        .enumerate()
        .map(|(i, x)| (x - stage.analytic(w.time(i))).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn monotone_without_overshoot(r in 1e2f64..1e5, c in 1e-12f64..1e-9,
                                  v0 in -5.0f64..5.0, target in -5.0f64..5.0) {
        let s = RcStage::conventional(r, c, v0, target);
        let tau = s.time_constant();
        let w = simulate_step(&s, 5.0 * tau, tau / 50.0).unwrap();
        let (lo, hi) = if v0 < target { (v0, target) } else { (target, v0) };
        for pair in w.samples.windows(2) {
            if target >= v0 {
                prop_assert!(pair[1] >= pair[0]);
            } else {
                prop_assert!(pair[1] <= pair[0]);
            }
        }
        prop_assert!(w.samples.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
    }

    #[test]
    fn tracks_exponential(r in 1e2f64..1e5, c in 1e-12f64..1e-9) {
        let s = RcStage::conventional(r, c, 0.0, 5.0);
        let tau = s.time_constant();
        prop_assert!(max_error(&s, 5.0 * tau, tau / 100.0) <= 0.005 * 5.0);
    }
}

#[test]
fn first_order_convergence() {
    let s = RcStage::conventional(10e3, 100e-12, 0.0, 5.0);
    let tau = s.time_constant();
    let coarse = max_error(&s, 5.0 * tau, tau / 100.0);
    let fine = max_error(&s, 5.0 * tau, tau / 200.0);
    let ratio = coarse / fine;
    assert!((1.8..=2.2).contains(&ratio), "{ratio}");
}

#[test]
fn latency_falls_with_footer_width() {
    let params = WakeupParams {
        vdd: 5.0,
        r_unit: DEFAULT_R_UNIT,
        capacitance: 50e-12,
        timestep: None,
        max_duration: None,
    };
    let latencies: Vec<f64> = (1..=10)
        .map(|i| {
            let domain = SleepDomain {
                name: "and_array".into(),
                footer: FooterConfig {
                    w_circuit: 27.0,
                    w_footer: i as f64 * 0.5,
                    ..FooterConfig::default()
                },
                members: vec![],
                virtual_ground: "vgnd_and_array".into(),
                mode: SleepMode::Sleep,
            };
            wakeup_latency(&domain, &params, 0.5).unwrap()
        })
        .collect();
    assert!(latencies.windows(2).all(|w| w[1] < w[0]), "{latencies:?}");
}
