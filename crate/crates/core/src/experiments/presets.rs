//! Parameter sets of the reference figures and of the channel table.

use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use crate::channels::NoiseModel;
use crate::weakmeas::WeakMeasConfig;

/// Bell-type angle whose concurrence is sin 0.2 ≈ 0.1986.
pub const THETA_WEAK: f64 = 0.1;

pub const THETA_MAX: f64 = FRAC_PI_4;

/// One-sided strengths used throughout: w = 0.1, wr = 0.99.
pub fn one_sided_wm() -> WeakMeasConfig {
    WeakMeasConfig::one_sided(0.1, 0.99).expect("valid strengths")
}

/// Two-sided strengths for the correlated channel: w = 0.1, wr = 0.9.
pub fn two_sided_wm() -> WeakMeasConfig {
    WeakMeasConfig::two_sided(0.1, 0.9).expect("valid strengths")
}

/// A channel row with its default parameters and the expected verdict on
/// reaching zero fidelity deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelRow {
    pub label: &'static str,
    pub model: NoiseModel,
    pub cfg: WeakMeasConfig,
    pub zero_deviation_expected: bool,
}

pub fn adc_markovian() -> NoiseModel {
    NoiseModel::adc(0.2).expect("valid")
}

pub fn adc_non_markovian() -> NoiseModel {
    NoiseModel::non_markovian_adc(1.0, 0.05).expect("valid")
}

pub fn rtn_markovian() -> NoiseModel {
    NoiseModel::rtn(0.1, 3.0).expect("valid")
}

pub fn rtn_non_markovian() -> NoiseModel {
    NoiseModel::rtn(0.1, 0.02).expect("valid")
}

pub fn pln_markovian() -> NoiseModel {
    NoiseModel::pln(0.5, 3.0).expect("valid")
}

pub fn pln_non_markovian() -> NoiseModel {
    NoiseModel::pln(0.5, 0.05).expect("valid")
}

pub fn oun_markovian() -> NoiseModel {
    NoiseModel::oun(0.5, 5.0).expect("valid")
}

pub fn oun_non_markovian() -> NoiseModel {
    NoiseModel::oun(0.1, 0.05).expect("valid")
}

pub fn cadc(q: f64) -> NoiseModel {
    NoiseModel::cadc(0.2, q).expect("valid")
}

/// Memory factors swept for the correlated channel.
pub const MEMORY_FACTORS: [f64; 4] = [0.0, 0.4, 0.8, 0.99];

/// Reversal strengths compared for the non-Markovian damping series.
pub const REVERSAL_SWEEP: [f64; 4] = [0.0, 0.5, 0.9, 0.99];

/// All channel rows plus the correlated channel at q = 0.99.
pub fn channel_rows() -> Vec<ChannelRow> {
    let one = one_sided_wm();
    let row = |label, model, zero| ChannelRow {
        label,
        model,
        cfg: one,
        zero_deviation_expected: zero,
    };
    vec![
        row("ADC (Markovian)", adc_markovian(), true),
        row("ADC (non-Markovian)", adc_non_markovian(), true),
        row("RTN (Markovian)", rtn_markovian(), false),
        row("RTN (non-Markovian)", rtn_non_markovian(), false),
        row("PLN (Markovian)", pln_markovian(), false),
        row("PLN (non-Markovian)", pln_non_markovian(), false),
        row("OUN (Markovian)", oun_markovian(), false),
        row("OUN (non-Markovian)", oun_non_markovian(), false),
        ChannelRow {
            label: "CADC (q = 0.99)",
            model: cadc(0.99),
            cfg: two_sided_wm(),
            zero_deviation_expected: true,
        },
    ]
}
