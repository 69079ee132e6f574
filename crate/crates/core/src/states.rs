//! Two-qubit density matrices.
//!
//! Basis order is |00⟩, |01⟩, |10⟩, |11⟩ everywhere; the first factor is the
//! home qubit, the second the travel qubit. Pauli order is (σ_x, σ_y, σ_z).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{c, hermitian_eigenvalues, pauli, tensor, Complex, ComplexMatrix};

/// Tolerance for the Hermiticity, trace and positivity checks on a state.
pub const STATE_TOL: f64 = 1e-10;

/// Max |T - Tᵀ| for which the correlation matrix is treated as symmetric.
pub const CORRELATION_SYMMETRY_TOL: f64 = 1e-10;

/// Angle of the Bell-type state cos θ|00⟩ + sin θ|11⟩, θ ∈ (0, π/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellTypeParams {
    theta: f64,
}

impl BellTypeParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: theta,
                expected: "0 < theta < pi/2",
            });
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// A validated 4×4 density matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoQubitState {
    rho: ComplexMatrix,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity to [`STATE_TOL`].
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: rho.dim(),
            });
        }
        let d = diagnose(&rho);
        if d.hermiticity_defect > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "hermiticity defect {:e}",
                d.hermiticity_defect
            )));
        }
        if d.trace_defect > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "trace defect {:e}",
                d.trace_defect
            )));
        }
        if d.min_eigenvalue < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {:e}",
                d.min_eigenvalue
            )));
        }
        Ok(Self { rho })
    }

    /// Normalizes a positive operator by its trace and validates the result.
    pub fn from_unnormalized(m: ComplexMatrix) -> Result<Self> {
        let tr = m.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::InvalidState(format!("trace {tr:e} is not positive")));
        }
        Self::new(m.scale(1.0 / tr))
    }

    /// Pure state |ψ⟩⟨ψ| from a normalized amplitude vector.
    pub fn pure(amplitudes: [Complex; 4]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(&amplitudes))
    }

    /// |ab⟩⟨ab| for computational basis bits.
    pub fn basis(a: u8, b: u8) -> Self {
        let mut amps = [c(0.0, 0.0); 4];
        amps[(2 * (a & 1) + (b & 1)) as usize] = c(1.0, 0.0);
        Self {
            rho: ComplexMatrix::outer(&amps),
        }
    }

    /// (|00⟩ + |11⟩)/√2.
    pub fn bell() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            rho: ComplexMatrix::outer(&[c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)]),
        }
    }

    /// I/4.
    pub fn maximally_mixed() -> Self {
        Self {
            rho: ComplexMatrix::identity(4).scale(0.25),
        }
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> ComplexMatrix {
        self.rho
    }

    /// Entry ρ_ij with zero-based indices.
    pub fn entry(&self, i: usize, j: usize) -> Complex {
        self.rho[(i, j)]
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    pub fn diagnostics(&self) -> Diagnostics {
        diagnose(&self.rho)
    }

    /// Largest modulus among the entries that must vanish in an X-state.
    pub fn x_state_defect(&self) -> f64 {
        const OUTSIDE_X: [(usize, usize); 8] = [
            (0, 1),
            (0, 2),
            (1, 0),
            (1, 3),
            (2, 0),
            (2, 3),
            (3, 1),
            (3, 2),
        ];
        OUTSIDE_X
            .iter()
            .map(|&(i, j)| self.rho[(i, j)].norm())
            .fold(0.0, f64::max)
    }
}

/// Bell-type resource cos θ|00⟩ + sin θ|11⟩.
pub fn bell_type(params: BellTypeParams) -> TwoQubitState {
    let (s, co) = params.theta.sin_cos();
    TwoQubitState {
        rho: ComplexMatrix::outer(&[c(co, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]),
    }
}

/// Pauli correlation matrix T_ij = Tr(ρ σ_i ⊗ σ_j).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub t: [[f64; 3]; 3],
}

impl CorrelationMatrix {
    /// Max |T_ij - T_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in (i + 1)..3 {
                worst = worst.max((self.t[i][j] - self.t[j][i]).abs());
            }
        }
        worst
    }

    /// Eigenvalues of (T + Tᵀ)/2, descending.
    ///
    /// Errors with `AsymmetricCorrelation` when T is not symmetric: eigenvalues
    /// and singular values of T differ there and neither is chosen silently.
    pub fn diag_eigs(&self) -> Result<[f64; 3]> {
        let defect = self.asymmetry();
        if defect >= CORRELATION_SYMMETRY_TOL {
            return Err(Error::AsymmetricCorrelation { defect });
        }
        let mut sym = ComplexMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                sym[(i, j)] = c(0.5 * (self.t[i][j] + self.t[j][i]), 0.0);
            }
        }
        let ev = hermitian_eigenvalues(&sym)?;
        Ok([ev[0], ev[1], ev[2]])
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.t[0][0], self.t[1][1], self.t[2][2]]
    }

    pub fn determinant(&self) -> f64 {
        let t = &self.t;
        t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1])
            - t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0])
            + t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0])
    }
}

pub fn correlation_matrix(state: &TwoQubitState) -> CorrelationMatrix {
    let sigmas = pauli();
    let mut t = [[0.0; 3]; 3];
    for (i, si) in sigmas.iter().enumerate() {
        for (j, sj) in sigmas.iter().enumerate() {
            t[i][j] = (&state.rho * &tensor(si, sj)).trace().re;
        }
    }
    CorrelationMatrix { t }
}

/// Validity report for a candidate density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub hermiticity_defect: f64,
    /// |Tr ρ - 1|
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    pub fn is_valid(&self, tol: f64) -> bool {
        self.hermiticity_defect <= tol && self.trace_defect <= tol && self.min_eigenvalue >= -tol
    }
}

/// Reports defects without failing. Non-Hermitian input is Hermitized before
/// the eigenvalue check.
pub fn diagnose(rho: &ComplexMatrix) -> Diagnostics {
    let hermiticity_defect = rho.hermiticity_defect();
    let tr = rho.trace();
    let trace_defect = (tr - c(1.0, 0.0)).norm();
    let min_eigenvalue = hermitian_eigenvalues(&rho.hermitian_part())
        .ok()
        .and_then(|v| v.last().copied())
        .unwrap_or(f64::NAN);
    Diagnostics {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
    }
}
