//! Dense complex matrices for two-qubit work.
//!
//! Only what the metrics need: arithmetic, adjoints, Kronecker products and a
//! Hermitian eigensolver (cyclic Jacobi). Everything spectral routes through
//! Hermitian problems, so there is no general eigensolver here.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

/// Max entrywise |m - m†| accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in [-PSD_CLAMP, 0) are treated as floating-point residue and set to 0.
pub const PSD_CLAMP: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 64;

pub(crate) const fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Complex::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    /// Build from row-major entries. Rejects non-square input and NaN/Inf.
    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(dim, data)
    }

    pub fn from_vec(dim: usize, data: Vec<Complex>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    /// Real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::from_vec(dim, entries.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if diag.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, 0.0);
        }
        Ok(m)
    }

    /// Rank-one projector |v⟩⟨v|.
    pub fn outer(v: &[Complex]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Max entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entrywise |m - m†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// (m + m†)/2.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale(0.5)
    }

    /// U·m·U†.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    fn check_hermitian(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            Err(Error::NotHermitian { defect })
        } else {
            Ok(())
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;
    fn index(&self, (r, col): (usize, usize)) -> &Complex {
        &self.data[r * self.dim + col]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut Complex {
        &mut self.data[r * self.dim + col]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product a ⊗ b.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    let mut out = ComplexMatrix::zeros(na * nb);
    for i in 0..na {
        for j in 0..na {
            let aij = a[(i, j)];
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column k is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    /// V·diag(f(λ))·V†.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.dim;
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let fl = f(lambda);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `m[p,q]` with a diagonal
/// unitary, then applies the real symmetric Jacobi rotation that zeroes it.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    m.check_hermitian()?;
    let n = m.dim;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // U restricted to (p,q): [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]
                let u_pp = c(cs, 0.0);
                let u_pq = c(sn, 0.0);
                let u_qp = -phase.conj() * sn;
                let u_qq = phase.conj() * cs;
                // A ← A·U (columns p, q)
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * u_pp + aiq * u_qp;
                    a[(i, q)] = aip * u_pq + aiq * u_qq;
                }
                // A ← U†·A (rows p, q)
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = u_pp.conj() * apj + u_qp.conj() * aqj;
                    a[(q, j)] = u_pq.conj() * apj + u_qq.conj() * aqj;
                }
                a[(p, q)] = c(0.0, 0.0);
                a[(q, p)] = c(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * u_pp + viq * u_qp;
                    v[(i, q)] = vip * u_pq + viq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(HermitianEig { values, vectors })
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?.values)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    sqrt_psd_clamped(m, PSD_CLAMP)
}

/// `sqrt_psd` with a caller-chosen clamp window for negative residue.
pub(crate) fn sqrt_psd_clamped(m: &ComplexMatrix, clamp: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    if let Some(&min) = eig.values.last() {
        if min < -clamp {
            return Err(Error::NegativeSpectrum { min });
        }
    }
    Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// Trace norm Σ|λ_k| of a Hermitian matrix.
///
/// Magnitudes are summed in ascending order, so m and -m give bit-identical
/// results.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let mut mags: Vec<f64> = hermitian_eig(m)?.values.iter().map(|l| l.abs()).collect();
    mags.sort_by(f64::total_cmp);
    Ok(mags.iter().sum())
}

/// Pauli matrices in the order (σ_x, σ_y, σ_z).
pub fn pauli() -> [ComplexMatrix; 3] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        ComplexMatrix {
            dim: 2,
            data: vec![z, one, one, z],
        },
        ComplexMatrix {
            dim: 2,
            data: vec![z, -i, i, z],
        },
        ComplexMatrix {
            dim: 2,
            data: vec![one, z, z, -one],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(dim: usize, xs: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real(dim, xs).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i4 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2));
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn sigma_z_tensor_sigma_z() {
        let [_, _, sz] = pauli();
        let zz = tensor(&sz, &sz);
        assert_eq!(
            zz,
            ComplexMatrix::from_diag(&[1.0, -1.0, -1.0, 1.0]).unwrap()
        );
    }

    #[test]
    fn weak_measurement_tensor_identity() {
        let mw = ComplexMatrix::from_diag(&[1.0, (1.0f64 - 0.19).sqrt()]).unwrap();
        let m = tensor(&mw, &ComplexMatrix::identity(2));
        let want = ComplexMatrix::from_diag(&[1.0, 1.0, 0.9, 0.9]).unwrap();
        assert!(m.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert_eq!(
            ComplexMatrix::from_real(2, &[1.0, f64::NAN, 0.0, 1.0]),
            Err(Error::NonFinite)
        );
        assert!(ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![]]).is_err());
    }

    #[test]
    fn double_adjoint_is_identity_map() {
        let m = ComplexMatrix::from_vec(
            2,
            vec![c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0), c(0.0, 4.0)],
        )
        .unwrap();
        assert_eq!(m.adjoint().adjoint(), m);
    }

    #[test]
    fn eig_diagonal() {
        let e = hermitian_eig(&real(2, &[1.0, 0.0, 0.0, 3.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
    }

    #[test]
    fn eig_pauli_x() {
        let e = hermitian_eig(&pauli()[0]).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_pauli_y_complex_pivot() {
        let e = hermitian_eig(&pauli()[1]).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
        let recon = e.map_spectrum(|l| l);
        assert!(recon.max_abs_diff(&pauli()[1]) < 1e-14);
    }

    #[test]
    fn eig_product_minus_bell() {
        // |00><00| - Bell projector; nonzero block [[1/2, -1/2], [-1/2, -1/2]]
        let h = 0.5;
        let m = real(
            4,
            &[
                1.0 - h,
                0.0,
                0.0,
                -h, //
                0.0,
                0.0,
                0.0,
                0.0, //
                0.0,
                0.0,
                0.0,
                0.0, //
                -h,
                0.0,
                0.0,
                -h,
            ],
        );
        let e = hermitian_eig(&m).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.values[0] - r).abs() < 1e-14);
        assert!(e.values[1].abs() < 1e-14 && e.values[2].abs() < 1e-14);
        assert!((e.values[3] + r).abs() < 1e-14);
        assert!((trace_norm(&m).unwrap() - 2.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = real(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
        assert!(matches!(trace_norm(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_satisfy_residual() {
        let m = ComplexMatrix::from_vec(
            3,
            vec![
                c(2.0, 0.0),
                c(0.3, -0.7),
                c(-1.1, 0.2),
                c(0.3, 0.7),
                c(-1.0, 0.0),
                c(0.5, 0.5),
                c(-1.1, -0.2),
                c(0.5, -0.5),
                c(0.25, 0.0),
            ],
        )
        .unwrap();
        let e = hermitian_eig(&m).unwrap();
        let v = &e.vectors;
        let vhv = &v.adjoint() * v;
        assert!(vhv.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        for k in 0..3 {
            for i in 0..3 {
                let mv: Complex = (0..3).map(|j| m[(i, j)] * v[(j, k)]).sum();
                let resid = (mv - v[(i, k)] * e.values[k]).norm();
                assert!(resid <= 1e-10 * (1.0 + m.max_abs()));
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(
            sqrt_psd(&ComplexMatrix::identity(4)).unwrap(),
            ComplexMatrix::identity(4)
        );
        let s = sqrt_psd(&ComplexMatrix::from_diag(&[4.0, 1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::from_diag(&[2.0, 1.0, 0.0, 0.0]).unwrap()) < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexMatrix::outer(&[c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)]);
        assert!(sqrt_psd(&bell).unwrap().max_abs_diff(&bell) < 1e-12);
    }

    #[test]
    fn sqrt_clamps_residue_and_rejects_negative() {
        let tiny = ComplexMatrix::from_diag(&[1.0, -5e-13]).unwrap();
        let s = sqrt_psd(&tiny).unwrap();
        assert_eq!(s[(1, 1)], c(0.0, 0.0));
        let neg = ComplexMatrix::from_diag(&[1.0, -1e-6]).unwrap();
        assert!(matches!(
            sqrt_psd(&neg),
            Err(Error::NegativeSpectrum { .. })
        ));
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&ComplexMatrix::zeros(4)).unwrap(), 0.0);
        assert_eq!(
            trace_norm(&ComplexMatrix::from_diag(&[1.0, -1.0]).unwrap()).unwrap(),
            2.0
        );
    }
}
