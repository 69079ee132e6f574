//! Noise channel catalog.
//!
//! Every family is driven by a closed-form noise function p(t). For the
//! amplitude damping families p is a decay probability in [0, 1]; for the
//! dephasing (unital) families it is the coherence retention factor in
//! [-1, 1] and may go negative for random telegraph noise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{c, pauli, tensor, ComplexMatrix};
use crate::states::TwoQubitState;

/// Max |Σ K†K - I| for a Kraus set to count as complete.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// ADC-family p values within this distance of [0, 1] are clamped.
const DECAY_CLAMP: f64 = 1e-12;

/// Below this |(2a/γ)² - 1| the RTN noise function uses its ω → 0 limit.
const RTN_CRITICAL_EPS: f64 = 1e-12;

/// Channel family and parameters. Serialized as
/// `{"family": "NM_ADC", "params": {"gamma0": 1.0, "k": 0.05}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", deny_unknown_fields)]
pub enum NoiseModel {
    /// Markovian amplitude damping, p = 1 - e^{-γt}.
    #[serde(rename = "ADC")]
    Adc { gamma: f64 },
    /// Damped Jaynes-Cummings amplitude damping.
    #[serde(rename = "NM_ADC")]
    NonMarkovianAdc { gamma0: f64, k: f64 },
    /// Random telegraph noise.
    #[serde(rename = "RTN")]
    Rtn { a: f64, gamma: f64 },
    /// Ornstein-Uhlenbeck noise.
    #[serde(rename = "OUN")]
    Oun { a: f64, gamma: f64 },
    /// Power-law noise.
    #[serde(rename = "PLN")]
    Pln { a: f64, gamma: f64 },
    /// Correlated amplitude damping on both qubits with memory factor q.
    #[serde(rename = "CADC")]
    Cadc { gamma: f64, q: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseFamily {
    #[serde(rename = "ADC")]
    Adc,
    #[serde(rename = "NM_ADC")]
    NonMarkovianAdc,
    #[serde(rename = "RTN")]
    Rtn,
    #[serde(rename = "OUN")]
    Oun,
    #[serde(rename = "PLN")]
    Pln,
    #[serde(rename = "CADC")]
    Cadc,
}

impl NoiseFamily {
    pub const ALL: [NoiseFamily; 6] = [
        NoiseFamily::Adc,
        NoiseFamily::NonMarkovianAdc,
        NoiseFamily::Rtn,
        NoiseFamily::Oun,
        NoiseFamily::Pln,
        NoiseFamily::Cadc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseFamily::Adc => "ADC",
            NoiseFamily::NonMarkovianAdc => "NM_ADC",
            NoiseFamily::Rtn => "RTN",
            NoiseFamily::Oun => "OUN",
            NoiseFamily::Pln => "PLN",
            NoiseFamily::Cadc => "CADC",
        }
    }

    /// Dephasing families built from I and σ_z.
    pub fn is_unital(self) -> bool {
        matches!(self, NoiseFamily::Rtn | NoiseFamily::Oun | NoiseFamily::Pln)
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Markovian,
    NonMarkovian,
}

impl NoiseModel {
    pub fn family(&self) -> NoiseFamily {
        match self {
            NoiseModel::Adc { .. } => NoiseFamily::Adc,
            NoiseModel::NonMarkovianAdc { .. } => NoiseFamily::NonMarkovianAdc,
            NoiseModel::Rtn { .. } => NoiseFamily::Rtn,
            NoiseModel::Oun { .. } => NoiseFamily::Oun,
            NoiseModel::Pln { .. } => NoiseFamily::Pln,
            NoiseModel::Cadc { .. } => NoiseFamily::Cadc,
        }
    }

    /// Checks parameter ranges. Constructors call this; deserialized models
    /// must be validated explicitly.
    pub fn validate(&self) -> Result<()> {
        fn finite(name: &str, x: f64) -> Result<()> {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!(
                    "{name} must be finite, got {x}"
                )))
            }
        }
        fn at_least(name: &str, x: f64, lo: f64) -> Result<()> {
            finite(name, x)?;
            if x >= lo {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!(
                    "{name} must be >= {lo}, got {x}"
                )))
            }
        }
        fn positive(name: &str, x: f64) -> Result<()> {
            finite(name, x)?;
            if x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be > 0, got {x}")))
            }
        }
        match *self {
            NoiseModel::Adc { gamma } => at_least("gamma", gamma, 0.0),
            NoiseModel::Cadc { gamma, q } => {
                at_least("gamma", gamma, 0.0)?;
                finite("q", q)?;
                if (0.0..=1.0).contains(&q) {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "q must lie in [0, 1], got {q}"
                    )))
                }
            }
            NoiseModel::NonMarkovianAdc { gamma0, k } => {
                positive("gamma0", gamma0)?;
                positive("k", k)?;
                if 2.0 * gamma0 > k {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "NM_ADC needs 2*gamma0 > k for a real l, got gamma0 = {gamma0}, k = {k}"
                    )))
                }
            }
            NoiseModel::Rtn { a, gamma }
            | NoiseModel::Oun { a, gamma }
            | NoiseModel::Pln { a, gamma } => {
                at_least("a", a, 0.0)?;
                positive("gamma", gamma)
            }
        }
    }

    pub fn adc(gamma: f64) -> Result<Self> {
        checked(NoiseModel::Adc { gamma })
    }

    pub fn non_markovian_adc(gamma0: f64, k: f64) -> Result<Self> {
        checked(NoiseModel::NonMarkovianAdc { gamma0, k })
    }

    pub fn rtn(a: f64, gamma: f64) -> Result<Self> {
        checked(NoiseModel::Rtn { a, gamma })
    }

    pub fn oun(a: f64, gamma: f64) -> Result<Self> {
        checked(NoiseModel::Oun { a, gamma })
    }

    pub fn pln(a: f64, gamma: f64) -> Result<Self> {
        checked(NoiseModel::Pln { a, gamma })
    }

    pub fn cadc(gamma: f64, q: f64) -> Result<Self> {
        checked(NoiseModel::Cadc { gamma, q })
    }

    /// Markovian/non-Markovian label for reporting.
    ///
    /// RTN is non-Markovian when ω is real (2a/γ > 1). OUN and PLN are labeled
    /// non-Markovian when the noise correlation time 1/γ exceeds the
    /// dephasing time 1/a.
    pub fn regime(&self) -> Regime {
        match *self {
            NoiseModel::Adc { .. } | NoiseModel::Cadc { .. } => Regime::Markovian,
            NoiseModel::NonMarkovianAdc { .. } => Regime::NonMarkovian,
            NoiseModel::Rtn { a, gamma } => {
                if 2.0 * a / gamma > 1.0 {
                    Regime::NonMarkovian
                } else {
                    Regime::Markovian
                }
            }
            NoiseModel::Oun { a, gamma } | NoiseModel::Pln { a, gamma } => {
                if gamma < a {
                    Regime::NonMarkovian
                } else {
                    Regime::Markovian
                }
            }
        }
    }

    /// 1/(fastest rate in the model); infinite when every rate is zero.
    pub fn characteristic_time(&self) -> f64 {
        let rate = match *self {
            NoiseModel::Adc { gamma } | NoiseModel::Cadc { gamma, .. } => gamma,
            NoiseModel::NonMarkovianAdc { gamma0, k } => gamma0.max(k),
            NoiseModel::Rtn { a, gamma } => (2.0 * a).max(gamma),
            NoiseModel::Oun { a, gamma } | NoiseModel::Pln { a, gamma } => a.max(gamma),
        };
        if rate > 0.0 {
            1.0 / rate
        } else {
            f64::INFINITY
        }
    }

    pub fn memory_factor(&self) -> Option<f64> {
        match *self {
            NoiseModel::Cadc { q, .. } => Some(q),
            _ => None,
        }
    }
}

fn checked(model: NoiseModel) -> Result<NoiseModel> {
    model.validate()?;
    Ok(model)
}

/// Noise function p(t) for a model.
pub fn noise_function(model: &NoiseModel, t: f64) -> Result<f64> {
    model.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            expected: "finite t >= 0",
        });
    }
    let p = match *model {
        NoiseModel::Adc { gamma } | NoiseModel::Cadc { gamma, .. } => -(-gamma * t).exp_m1(),
        NoiseModel::NonMarkovianAdc { gamma0, k } => {
            let l = (2.0 * gamma0 * k - k * k).sqrt();
            let (s, co) = (0.5 * l * t).sin_cos();
            let bracket = co + (k / l) * s;
            1.0 - (-k * t).exp() * bracket * bracket
        }
        NoiseModel::Rtn { a, gamma } => rtn_coherence(a, gamma, t),
        NoiseModel::Oun { a, gamma } => (-0.5 * a * (t + (-gamma * t).exp_m1() / gamma)).exp(),
        NoiseModel::Pln { a, gamma } => {
            let gt = gamma * t;
            (-(t * (gt + 2.0) * a * gamma) / (2.0 * (gt + 1.0) * (gt + 1.0))).exp()
        }
    };
    if model.family().is_unital() {
        return Ok(p);
    }
    clamp_decay(p)
}

fn clamp_decay(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else if p > -DECAY_CLAMP && p < 1.0 + DECAY_CLAMP {
        Ok(p.clamp(0.0, 1.0))
    } else {
        Err(Error::InvalidParams(format!(
            "decay probability {p} left [0, 1]"
        )))
    }
}

/// e^{-γt}(cos(ωγt) + sin(ωγt)/ω) with ω = √((2a/γ)² - 1), continued to the
/// hyperbolic branch when ω is imaginary.
fn rtn_coherence(a: f64, gamma: f64, t: f64) -> f64 {
    let x = (2.0 * a / gamma).powi(2) - 1.0;
    let gt = gamma * t;
    if x.abs() < RTN_CRITICAL_EPS {
        (-gt).exp() * (1.0 + gt)
    } else if x > 0.0 {
        let omega = x.sqrt();
        let (s, co) = (omega * gt).sin_cos();
        (-gt).exp() * (co + s / omega)
    } else {
        // e^{-γt}cosh(Ωγt) and e^{-γt}sinh(Ωγt) written as decaying exponentials
        let big = (-x).sqrt();
        let slow = (-(1.0 - big) * gt).exp();
        let fast = (-(1.0 + big) * gt).exp();
        0.5 * (slow + fast) + 0.5 * (slow - fast) / big
    }
}

/// A complete set of Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::IncompleteKraus { defect: 1.0 });
        };
        let dim = first.dim();
        if let Some(bad) = operators.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        let set = Self { operators };
        let defect = set.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::IncompleteKraus { defect });
        }
        Ok(set)
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    /// Max |Σ K†K - I|.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.operators[0].dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for k in &self.operators {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }
}

/// Amplitude damping pair K₀ = diag(1, √(1-p)), K₁ = √p |0⟩⟨1|.
pub fn amplitude_damping_kraus(p: f64) -> Result<KrausSet> {
    let p = clamp_decay(p)?;
    let mut k1 = ComplexMatrix::zeros(2);
    k1[(0, 1)] = c(p.sqrt(), 0.0);
    KrausSet::new(vec![
        ComplexMatrix::from_diag(&[1.0, (1.0 - p).sqrt()])?,
        k1,
    ])
}

/// Dephasing pair √((1+p)/2) I, √((1-p)/2) σ_z.
pub fn dephasing_kraus(p: f64) -> Result<KrausSet> {
    if !(-1.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            expected: "-1 <= p <= 1",
        });
    }
    let [_, _, sz] = pauli();
    KrausSet::new(vec![
        ComplexMatrix::identity(2).scale((0.5 * (1.0 + p)).sqrt()),
        sz.scale((0.5 * (1.0 - p)).sqrt()),
    ])
}

/// Single-qubit Kraus set of a model at time t. CADC has no single-qubit
/// decomposition; use [`apply_cadc`].
pub fn kraus_at(model: &NoiseModel, t: f64) -> Result<KrausSet> {
    let family = model.family();
    if family == NoiseFamily::Cadc {
        return Err(Error::UnsupportedFamily(family.name()));
    }
    let p = noise_function(model, t)?;
    if family.is_unital() {
        dephasing_kraus(p)
    } else {
        amplitude_damping_kraus(p)
    }
}

/// Σ (I ⊗ K) m (I ⊗ K)† on an arbitrary (possibly unnormalized) operator.
pub(crate) fn travel_qubit_map(m: &ComplexMatrix, ks: &KrausSet) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let mut out = ComplexMatrix::zeros(4);
    for k in ks.operators() {
        out = &out + &m.conjugate_by(&tensor(&id, k));
    }
    out
}

/// Applies a single-qubit channel to the travel (second) qubit.
pub fn apply_one_sided(state: &TwoQubitState, ks: &KrausSet) -> Result<TwoQubitState> {
    if ks.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: ks.dim(),
        });
    }
    let defect = ks.completeness_defect();
    if defect > COMPLETENESS_TOL {
        return Err(Error::IncompleteKraus { defect });
    }
    TwoQubitState::new(travel_qubit_map(state.rho(), ks))
}

/// Fully correlated two-qubit damping pair E₀ = diag(1,1,1,√(1-p)), E₁ = √p |00⟩⟨11|.
pub fn correlated_damping_kraus(p: f64) -> Result<KrausSet> {
    let p = clamp_decay(p)?;
    let mut e1 = ComplexMatrix::zeros(4);
    e1[(0, 3)] = c(p.sqrt(), 0.0);
    KrausSet::new(vec![
        ComplexMatrix::from_diag(&[1.0, 1.0, 1.0, (1.0 - p).sqrt()])?,
        e1,
    ])
}

/// (1-q) Σ_ij (K_i ⊗ K_j) m (K_i ⊗ K_j)† + q Σ_i E_i m E_i† on any operator.
pub(crate) fn cadc_map(m: &ComplexMatrix, p: f64, q: f64) -> Result<ComplexMatrix> {
    let single = amplitude_damping_kraus(p)?;
    let mut uncorrelated = ComplexMatrix::zeros(4);
    for ki in single.operators() {
        for kj in single.operators() {
            uncorrelated = &uncorrelated + &m.conjugate_by(&tensor(ki, kj));
        }
    }
    let mut correlated = ComplexMatrix::zeros(4);
    for e in correlated_damping_kraus(p)?.operators() {
        correlated = &correlated + &m.conjugate_by(e);
    }
    Ok(&uncorrelated.scale(1.0 - q) + &correlated.scale(q))
}

/// Correlated amplitude damping acting on both qubits.
pub fn apply_cadc(state: &TwoQubitState, model: &NoiseModel, t: f64) -> Result<TwoQubitState> {
    let NoiseModel::Cadc { q, .. } = *model else {
        return Err(Error::InvalidParams(format!(
            "apply_cadc needs a CADC model, got {}",
            model.family()
        )));
    };
    let p = noise_function(model, t)?;
    TwoQubitState::new(cadc_map(state.rho(), p, q)?)
}
