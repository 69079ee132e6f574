//! Shared fixtures for the kernel benchmarks.

use telewm_core::experiments::{default_time_grid, presets, Scenario};
use telewm_core::states::bell_type;
use telewm_core::weakmeas::run_protocol;
use telewm_core::{BellTypeParams, NoiseModel, TwoQubitState, WeakMeasConfig};

pub const THETA: f64 = 0.1;

pub fn input_state() -> TwoQubitState {
    bell_type(BellTypeParams::new(THETA).expect("valid angle"))
}

pub fn model() -> NoiseModel {
    presets::adc_non_markovian()
}

pub fn measurement() -> WeakMeasConfig {
    presets::one_sided_wm()
}

/// Mixed output of the protocol at t = 2, a typical metric input.
pub fn output_state() -> TwoQubitState {
    run_protocol(&input_state(), &measurement(), &model(), 2.0)
        .expect("protocol succeeds")
        .state
}

pub fn scenario() -> Scenario {
    Scenario::new(THETA, measurement(), model(), default_time_grid(), None).expect("valid scenario")
}
