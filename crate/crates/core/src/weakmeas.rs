//! Weak measurement (WM) and its reversal (RWM) around a noisy channel.
//!
//! The protocol is WM → channel → RWM → normalize. The normalizing trace is
//! the post-selection success probability.

use serde::{Deserialize, Serialize};

use crate::channels::{
    cadc_map, kraus_at, noise_function, travel_qubit_map, NoiseFamily, NoiseModel,
};
use crate::error::{Error, Result};
use crate::matkernel::{tensor, ComplexMatrix};
use crate::states::{BellTypeParams, TwoQubitState};

/// Traces below this make post-selection numerically vacuous.
pub const SUCCESS_PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementMode {
    /// WM/RWM on the travel qubit only.
    OneSided,
    /// WM/RWM on both qubits; required for the correlated channel.
    TwoSided,
}

impl MeasurementMode {
    /// The mode a channel family requires.
    pub fn for_family(family: NoiseFamily) -> Self {
        if family == NoiseFamily::Cadc {
            MeasurementMode::TwoSided
        } else {
            MeasurementMode::OneSided
        }
    }
}

/// Measurement strengths w (WM) and wr (RWM), both in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakMeasConfig {
    pub w: f64,
    pub wr: f64,
    pub mode: MeasurementMode,
}

impl WeakMeasConfig {
    pub fn new(w: f64, wr: f64, mode: MeasurementMode) -> Result<Self> {
        let cfg = Self { w, wr, mode };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn one_sided(w: f64, wr: f64) -> Result<Self> {
        Self::new(w, wr, MeasurementMode::OneSided)
    }

    pub fn two_sided(w: f64, wr: f64) -> Result<Self> {
        Self::new(w, wr, MeasurementMode::TwoSided)
    }

    /// No measurement at all, in the mode the family needs.
    pub fn none_for(family: NoiseFamily) -> Self {
        Self {
            w: 0.0,
            wr: 0.0,
            mode: MeasurementMode::for_family(family),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_strength("w", self.w)?;
        check_strength("wr", self.wr)
    }
}

fn check_strength(name: &'static str, x: f64) -> Result<()> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: x,
            expected: "0 <= strength < 1",
        })
    }
}

/// M_w = diag(1, √(1-w)).
pub fn wm_operator(w: f64) -> Result<ComplexMatrix> {
    check_strength("w", w)?;
    ComplexMatrix::from_diag(&[1.0, (1.0 - w).sqrt()])
}

/// M_wr = diag(√(1-wr), 1).
pub fn rwm_operator(wr: f64) -> Result<ComplexMatrix> {
    check_strength("wr", wr)?;
    ComplexMatrix::from_diag(&[(1.0 - wr).sqrt(), 1.0])
}

/// Post-selected output of the protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolOutcome {
    pub state: TwoQubitState,
    pub success_prob: f64,
}

fn lift(op: &ComplexMatrix, mode: MeasurementMode) -> ComplexMatrix {
    match mode {
        MeasurementMode::OneSided => tensor(&ComplexMatrix::identity(2), op),
        MeasurementMode::TwoSided => tensor(op, op),
    }
}

/// The protocol output before normalization; its trace is P_wm.
pub fn protocol_unnormalized(
    input: &TwoQubitState,
    cfg: &WeakMeasConfig,
    model: &NoiseModel,
    t: f64,
) -> Result<ComplexMatrix> {
    cfg.validate()?;
    model.validate()?;
    let required = MeasurementMode::for_family(model.family());
    if cfg.mode != required {
        return Err(Error::InvalidParams(format!(
            "{} needs {:?} measurements, got {:?}",
            model.family(),
            required,
            cfg.mode
        )));
    }
    let wm = lift(&wm_operator(cfg.w)?, cfg.mode);
    let rwm = lift(&rwm_operator(cfg.wr)?, cfg.mode);

    let measured = input.rho().conjugate_by(&wm);
    let noisy = match *model {
        NoiseModel::Cadc { q, .. } => cadc_map(&measured, noise_function(model, t)?, q)?,
        _ => travel_qubit_map(&measured, &kraus_at(model, t)?),
    };
    Ok(noisy.conjugate_by(&rwm))
}

/// Runs WM → channel at time t → RWM and normalizes.
pub fn run_protocol(
    input: &TwoQubitState,
    cfg: &WeakMeasConfig,
    model: &NoiseModel,
    t: f64,
) -> Result<ProtocolOutcome> {
    let raw = protocol_unnormalized(input, cfg, model, t)?;
    let success_prob = raw.trace().re;
    if success_prob.is_nan() || success_prob < SUCCESS_PROB_FLOOR {
        return Err(Error::SuccessProbTooSmall {
            prob: success_prob,
            t: Some(t),
        });
    }
    let state = TwoQubitState::new(raw.scale(1.0 / success_prob))?;
    Ok(ProtocolOutcome {
        state,
        success_prob,
    })
}

/// P_wm = (1-wr)cos²θ + (1-w)(1-wr·p)sin²θ for a Bell-type input through ADC.
pub fn success_prob_adc_closed(theta: f64, w: f64, wr: f64, p: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (1.0 - wr) * c * c + (1.0 - w) * (1.0 - wr * p) * s * s
}

/// P_wm for a Bell-type input through a dephasing channel. Independent of p:
/// dephasing leaves the diagonal alone.
pub fn success_prob_unital_closed(theta: f64, w: f64, wr: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (1.0 - wr) * c * c + (1.0 - w) * s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormFamily {
    /// Dephasing channels (RTN, OUN, PLN).
    Unital,
    /// Amplitude damping (either regime).
    AmplitudeDamping,
}

/// Analytic protocol output for a Bell-type input with noise value p.
pub fn closed_form_final_state(
    theta: f64,
    w: f64,
    wr: f64,
    p: f64,
    family: ClosedFormFamily,
) -> Result<TwoQubitState> {
    BellTypeParams::new(theta)?;
    check_strength("w", w)?;
    check_strength("wr", wr)?;
    let (s, c) = theta.sin_cos();
    let mut rho = ComplexMatrix::zeros(4);
    match family {
        ClosedFormFamily::Unital => {
            if !(-1.0..=1.0).contains(&p) {
                return Err(Error::OutOfRange {
                    name: "p",
                    value: p,
                    expected: "-1 <= p <= 1",
                });
            }
            let denom = 2.0 - wr - w - (wr - w) * (2.0 * theta).cos();
            let corner = 2.0 * (1.0 - wr).sqrt() * p * (1.0 - w).sqrt() * c * s / denom;
            rho[(0, 0)] = (2.0 * (1.0 - wr) * c * c / denom).into();
            rho[(3, 3)] = (2.0 * (1.0 - w) * s * s / denom).into();
            rho[(0, 3)] = corner.into();
            rho[(3, 0)] = corner.into();
        }
        ClosedFormFamily::AmplitudeDamping => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::OutOfRange {
                    name: "p",
                    value: p,
                    expected: "0 <= p <= 1",
                });
            }
            let norm = success_prob_adc_closed(theta, w, wr, p);
            let corner = ((1.0 - wr) * (1.0 - w) * (1.0 - p)).sqrt() * c * s / norm;
            rho[(0, 0)] = ((1.0 - wr) * c * c / norm).into();
            rho[(2, 2)] = ((1.0 - wr) * (1.0 - w) * p * s * s / norm).into();
            rho[(3, 3)] = ((1.0 - w) * (1.0 - p) * s * s / norm).into();
            rho[(0, 3)] = corner.into();
            rho[(3, 0)] = corner.into();
        }
    }
    TwoQubitState::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply_one_sided, NoiseModel};
    use crate::states::bell_type;

    fn bt(theta: f64) -> TwoQubitState {
        bell_type(BellTypeParams::new(theta).unwrap())
    }

    /// ADC with γ = 1 reaches decay probability p at t = -ln(1-p).
    fn adc_at(p: f64) -> (NoiseModel, f64) {
        (NoiseModel::adc(1.0).unwrap(), -(1.0 - p).ln())
    }

    #[test]
    fn operators() {
        assert_eq!(wm_operator(0.0).unwrap(), ComplexMatrix::identity(2));
        let m = rwm_operator(0.99).unwrap();
        assert!((m[(0, 0)].re - 0.1).abs() < 1e-15);
        assert_eq!(m[(1, 1)].re, 1.0);
        let m = wm_operator(0.1).unwrap();
        assert!((m[(1, 1)].re - 0.9486832980505138).abs() < 1e-15);
        assert!(wm_operator(1.0).is_err());
        assert!(rwm_operator(-0.1).is_err());
    }

    #[test]
    fn no_measurement_matches_plain_channel() {
        let s = bt(0.3);
        let model = NoiseModel::adc(0.2).unwrap();
        let out = run_protocol(
            &s,
            &WeakMeasConfig::one_sided(0.0, 0.0).unwrap(),
            &model,
            1.3,
        )
        .unwrap();
        assert!((out.success_prob - 1.0).abs() < 1e-15);
        let plain = apply_one_sided(&s, &kraus_at(&model, 1.3).unwrap()).unwrap();
        assert!(out.state.rho().max_abs_diff(plain.rho()) < 1e-15);
    }

    #[test]
    fn success_probability_at_p_zero() {
        let (model, t) = adc_at(0.0);
        let cfg = WeakMeasConfig::one_sided(0.1, 0.99).unwrap();
        let out = run_protocol(&bt(0.1), &cfg, &model, t).unwrap();
        // numpy reference
        assert!((out.success_prob - 0.018870372860647484).abs() < 1e-15);
        assert!((success_prob_adc_closed(0.1, 0.1, 0.99, 0.0) - out.success_prob).abs() < 1e-15);
    }

    #[test]
    fn closed_success_probability() {
        assert!((success_prob_adc_closed(0.4, 0.0, 0.0, 0.3) - 1.0).abs() < 1e-15);
        assert!(
            (success_prob_adc_closed(std::f64::consts::FRAC_PI_4, 0.5, 0.5, 0.0) - 0.5).abs()
                < 1e-15
        );
        assert!(
            (success_prob_adc_closed(0.1, 0.1, 0.99, 0.5) - 0.014430203074784057).abs() < 1e-15
        );
    }

    #[test]
    fn pipeline_concurrence_corner_at_half_decay() {
        let (model, t) = adc_at(0.5);
        let cfg = WeakMeasConfig::one_sided(0.1, 0.99).unwrap();
        let out = run_protocol(&bt(0.1), &cfg, &model, t).unwrap();
        assert!((2.0 * out.state.entry(0, 3).re - 0.9235589958087908).abs() < 1e-12);
        let cf = closed_form_final_state(0.1, 0.1, 0.99, 0.5, ClosedFormFamily::AmplitudeDamping)
            .unwrap();
        assert!(cf.rho().max_abs_diff(out.state.rho()) < 1e-12);
    }

    #[test]
    fn closed_forms_without_measurement() {
        let th = 0.35;
        let p = 0.6;
        let u = closed_form_final_state(th, 0.0, 0.0, p, ClosedFormFamily::Unital).unwrap();
        let (s, c) = f64::sin_cos(th);
        assert!((u.entry(0, 0).re - c * c).abs() < 1e-15);
        assert!((u.entry(3, 3).re - s * s).abs() < 1e-15);
        assert!((u.entry(0, 3).re - p * c * s).abs() < 1e-15);
        assert_eq!(u.entry(1, 1).re, 0.0);

        let a =
            closed_form_final_state(th, 0.0, 0.0, 0.0, ClosedFormFamily::AmplitudeDamping).unwrap();
        assert!(a.rho().max_abs_diff(bt(th).rho()) < 1e-15);
    }

    #[test]
    fn mode_must_match_family() {
        let s = TwoQubitState::bell();
        let adc = NoiseModel::adc(0.2).unwrap();
        let cadc = NoiseModel::cadc(0.2, 0.5).unwrap();
        assert!(
            run_protocol(&s, &WeakMeasConfig::two_sided(0.1, 0.1).unwrap(), &adc, 1.0).is_err()
        );
        assert!(run_protocol(
            &s,
            &WeakMeasConfig::one_sided(0.1, 0.1).unwrap(),
            &cadc,
            1.0
        )
        .is_err());
        assert!(run_protocol(
            &s,
            &WeakMeasConfig::two_sided(0.1, 0.1).unwrap(),
            &cadc,
            1.0
        )
        .is_ok());
    }

    #[test]
    fn vacuous_post_selection_errors() {
        // |00⟩ with wr → 1 leaves almost nothing after the reversal
        let s = TwoQubitState::basis(0, 0);
        let cfg = WeakMeasConfig {
            w: 0.0,
            wr: 1.0 - 1e-14,
            mode: MeasurementMode::OneSided,
        };
        let err = run_protocol(&s, &cfg, &NoiseModel::adc(0.2).unwrap(), 0.5).unwrap_err();
        assert!(matches!(err, Error::SuccessProbTooSmall { t: Some(t), .. } if t == 0.5));
    }

    #[test]
    fn config_rejects_unit_strength() {
        assert!(WeakMeasConfig::one_sided(1.0, 0.0).is_err());
        assert!(WeakMeasConfig::one_sided(0.0, 1.0).is_err());
        assert!(WeakMeasConfig::one_sided(0.0, f64::NAN).is_err());
    }
}
