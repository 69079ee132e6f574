//! Scalar diagnostics of two-qubit states and their closed-form counterparts
//! for Bell-type inputs.

use serde::{Deserialize, Serialize};

use crate::channels::NoiseModel;
use crate::error::{Error, Result};
use crate::matkernel::{
    hermitian_eig, hermitian_eigenvalues, pauli, tensor, trace_norm, ComplexMatrix,
};
use crate::states::{correlation_matrix, TwoQubitState};
use crate::weakmeas::{run_protocol, ProtocolOutcome, WeakMeasConfig};

/// Best fidelity reachable with classical communication alone.
pub const CLASSICAL_FIDELITY: f64 = 2.0 / 3.0;

/// Default BLP finite-difference step.
pub const DEFAULT_BLP_STEP: f64 = 1e-3;

/// dt may not exceed this fraction of the model's characteristic time.
pub const BLP_STEP_FRACTION: f64 = 1e-2;

/// All metrics of one protocol output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub t: f64,
    pub concurrence: f64,
    pub coherence_l1: f64,
    pub fidelity: f64,
    pub fidelity_deviation: f64,
    pub success_prob: f64,
}

impl MetricRecord {
    pub fn evaluate(outcome: &ProtocolOutcome, t: f64) -> Result<Self> {
        let state = &outcome.state;
        let (fidelity, fidelity_deviation) = fidelity_pair(state)?;
        Ok(Self {
            t,
            concurrence: concurrence(state),
            coherence_l1: coherence_l1(state),
            fidelity,
            fidelity_deviation,
            success_prob: outcome.success_prob,
        })
    }

    /// Teleportation beats the classical bound.
    pub fn beats_classical(&self) -> bool {
        self.fidelity > CLASSICAL_FIDELITY
    }
}

/// σ_y ⊗ σ_y
fn spin_flip() -> ComplexMatrix {
    let y = &pauli()[1];
    tensor(y, y)
}

/// Eigenvalues of ρ below this are roundoff and dropped before the square root.
const ROUNDOFF_EIGENVALUE: f64 = 1e-14;

/// Wootters concurrence max(0, λ1-λ2-λ3-λ4).
///
/// √ρ·ρ̃·√ρ = A·A† with A = √ρ·(σ_y⊗σ_y)·√ρ*, so the λ are the singular values
/// of A. They are read off the Hermitian dilation [[0, A], [A†, 0]], which
/// keeps small λ accurate to roundoff instead of to its square root.
pub fn concurrence(state: &TwoQubitState) -> f64 {
    let rho = state.rho();
    // states are validated Hermitian, so neither decomposition can fail
    let eig = hermitian_eig(rho).expect("valid state is Hermitian");
    let root = eig.map_spectrum(|l| {
        if l > ROUNDOFF_EIGENVALUE {
            l.sqrt()
        } else {
            0.0
        }
    });
    let a = &(&root * &spin_flip()) * &root.conj();
    let n = a.dim();
    let mut dilation = ComplexMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            dilation[(i, n + j)] = a[(i, j)];
            dilation[(n + j, i)] = a[(i, j)].conj();
        }
    }
    let lambdas =
        hermitian_eigenvalues(&dilation.hermitian_part()).expect("Hermitian by construction");
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0)
}

/// Σ_{i≠j} |ρ_ij|
pub fn coherence_l1(state: &TwoQubitState) -> f64 {
    let rho = state.rho();
    let n = rho.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += rho[(i, j)].norm();
            }
        }
    }
    sum
}

pub(crate) fn fidelity_pair(state: &TwoQubitState) -> Result<(f64, f64)> {
    let eigs = correlation_matrix(state).diag_eigs()?;
    let a = eigs.map(f64::abs);
    let fidelity = 0.5 * (1.0 + (a[0] + a[1] + a[2]) / 3.0);
    let spread = (a[0] - a[1]).powi(2) + (a[0] - a[2]).powi(2) + (a[1] - a[2]).powi(2);
    let deviation = spread.sqrt() / (3.0 * 10f64.sqrt());
    Ok((fidelity, deviation))
}

/// Optimal average teleportation fidelity ½(1 + Σ|t_ii|/3).
pub fn fidelity(state: &TwoQubitState) -> Result<f64> {
    Ok(fidelity_pair(state)?.0)
}

/// Spread of the teleportation fidelity over input states.
pub fn fidelity_deviation(state: &TwoQubitState) -> Result<f64> {
    Ok(fidelity_pair(state)?.1)
}

/// ½ Tr|a - b|
pub fn trace_distance(a: &TwoQubitState, b: &TwoQubitState) -> f64 {
    let diff = a.rho() - b.rho();
    0.5 * trace_norm(&diff.hermitian_part()).expect("difference of Hermitian matrices")
}

/// The pair whose distinguishability probes backflow: |00⟩ and the Bell state.
pub fn blp_pair() -> (TwoQubitState, TwoQubitState) {
    (TwoQubitState::basis(0, 0), TwoQubitState::bell())
}

/// Trace distance between the two evolved members of the BLP pair.
pub fn blp_distance(model: &NoiseModel, cfg: &WeakMeasConfig, t: f64) -> Result<f64> {
    let (a, b) = blp_pair();
    let ea = run_protocol(&a, cfg, model, t)?;
    let eb = run_protocol(&b, cfg, model, t)?;
    Ok(trace_distance(&ea.state, &eb.state))
}

pub(crate) fn check_blp_step(model: &NoiseModel, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::OutOfRange {
            name: "dt",
            value: dt,
            expected: "finite dt > 0",
        });
    }
    let limit = BLP_STEP_FRACTION * model.characteristic_time();
    if dt > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    Ok(())
}

/// σ(t) = dD/dt by central difference.
pub fn blp_sigma(model: &NoiseModel, cfg: &WeakMeasConfig, t: f64, dt: f64) -> Result<f64> {
    check_blp_step(model, dt)?;
    if t.is_nan() || t < dt {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            expected: "t >= dt",
        });
    }
    let ahead = blp_distance(model, cfg, t + dt)?;
    let behind = blp_distance(model, cfg, t - dt)?;
    Ok((ahead - behind) / (2.0 * dt))
}

/// Trapezoid integral of max(σ, 0) over a sampled grid.
pub fn integrated_non_markovianity(times: &[f64], sigma: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(sigma.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0].max(0.0) + s[1].max(0.0)))
        .sum()
}

/// Concurrence of a Bell-type input after WM, amplitude damping p and RWM.
pub fn closed_form_concurrence_adc(theta: f64, w: f64, wr: f64, p: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let norm = (1.0 - wr) * c * c + (1.0 - w) * (1.0 - wr * p) * s * s;
    ((1.0 - w) * (1.0 - wr) * (1.0 - p)).sqrt() * (2.0 * theta).sin() / norm
}

/// Concurrence of a Bell-type input after WM, dephasing p and RWM. Negative p
/// (oscillating telegraph noise) enters through its magnitude.
pub fn closed_form_concurrence_unital(theta: f64, w: f64, wr: f64, p: f64) -> f64 {
    let denom = (1.0 - w) + (1.0 - wr) - (wr - w) * (2.0 * theta).cos();
    2.0 * ((1.0 - w) * (1.0 - wr)).sqrt() * (2.0 * theta).sin() * p.abs() / denom
}
