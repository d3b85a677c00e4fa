//! Validated operator newtypes: density matrices, projections and unitaries.

use alloc::vec::Vec;

use crate::linalg::{eig_hermitian, HermitianEigen};
use crate::matrix::CMatrix;
use crate::{Error, Result, Tolerances, C64};

/// A positive semi-definite, unit-trace Hermitian matrix.
///
/// The stored matrix is exactly what was validated; the clamped spectrum kept alongside is for
/// reporting only.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    spectrum: Vec<f64>,
}

/// Which tensor factor a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity, in that order.
    pub fn validate(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        m.require_square()?;
        let residual = m.hermitian_residual();
        if residual > tol.herm {
            return Err(Error::NotHermitian { residual });
        }
        let tr = m.trace();
        let residual = (tr - C64::new(1.0, 0.0)).norm();
        if residual > tol.trace {
            return Err(Error::NotUnitTrace { residual });
        }
        let eig = eig_hermitian(&m, tol.herm)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let spectrum = eig.values.iter().map(|&l| l.clamp(0.0, 1.0)).collect();
        Ok(Self { matrix: m, spectrum })
    }

    pub fn from_diagonal(d: &[f64], tol: &Tolerances) -> Result<Self> {
        Self::validate(CMatrix::from_real_diagonal(d), tol)
    }

    /// The maximally mixed state I/n.
    pub fn maximally_mixed(n: usize) -> Self {
        let p = 1.0 / n as f64;
        Self { matrix: CMatrix::identity(n).scale_real(p), spectrum: alloc::vec![p; n] }
    }

    /// The pure state |ψ⟩⟨ψ| for a (not necessarily normalised) vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let nrm = crate::matrix::norm(psi);
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::NonFinite);
        }
        let v: Vec<C64> = psi.iter().map(|z| z / nrm).collect();
        let mut spectrum = alloc::vec![0.0; psi.len()];
        spectrum[0] = 1.0;
        Ok(Self { matrix: CMatrix::outer(&v), spectrum })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Eigenvalues clamped into [0, 1], descending.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        eig_hermitian(&self.matrix, f64::INFINITY)
    }

    /// −Σ λ ln λ over the eigen-decomposition.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        let eig = self.eigen()?;
        Ok(eig.values.iter().filter(|&&l| l > 0.0).map(|&l| -l * libm::log(l)).sum())
    }

    /// U ρ U†.
    pub fn conjugated_by(&self, u: &Unitary) -> Self {
        let m = u.matrix().conjugate(&self.matrix).hermitize();
        Self { matrix: m, spectrum: self.spectrum.clone() }
    }

    /// ρ₁ ⊗ ρ₂.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut spectrum: Vec<f64> =
            self.spectrum.iter().flat_map(|&a| other.spectrum.iter().map(move |&b| a * b)).collect();
        spectrum.sort_by(|a, b| b.total_cmp(a));
        Self { matrix: self.matrix.kron(&other.matrix), spectrum }
    }

    /// Convex combination r·self + (1 − r)·other.
    pub fn mix(&self, other: &Self, r: f64, tol: &Tolerances) -> Result<Self> {
        let m = &self.matrix.scale_real(r) + &other.matrix.scale_real(1.0 - r);
        Self::validate(m, tol)
    }

    /// Reduced state on one factor of an n·m composite.
    pub fn partial_trace(&self, n: usize, m: usize, keep: Keep) -> Result<Self> {
        if self.dim() != n * m {
            return Err(Error::DimensionMismatch { expected: n * m, got: self.dim() });
        }
        let r = &self.matrix;
        let out = match keep {
            Keep::First => {
                let mut out = CMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        out[(i, j)] = (0..m).map(|k| r[(i * m + k, j * m + k)]).sum();
                    }
                }
                out
            }
            Keep::Second => {
                let mut out = CMatrix::zeros(m, m);
                for k in 0..m {
                    for l in 0..m {
                        out[(k, l)] = (0..n).map(|i| r[(i * m + k, i * m + l)]).sum();
                    }
                }
                out
            }
        };
        // Marginals of a valid state are valid; re-validate with the loosest of the declared
        // tolerances so accumulated rounding on the composite cannot reject them.
        let loose = Tolerances { herm: 1e-9, trace: 1e-9, ..Tolerances::default() };
        Self::validate(out.hermitize(), &loose)
    }

    /// Trace distance ½‖self − other‖₁.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        trace_distance(&self.matrix, &other.matrix)
    }
}

/// ½‖a − b‖₁ for Hermitian a, b.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch { expected: a.rows(), got: b.rows() });
    }
    let d = (a - b).hermitize();
    let eig = eig_hermitian(&d, f64::INFINITY)?;
    Ok(0.5 * eig.values.iter().map(|l| l.abs()).sum::<f64>())
}

/// An orthogonal projection. Rank zero is allowed here; contexts reject it.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: CMatrix,
    rank: usize,
}

impl Projection {
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        m.require_square()?;
        let residual = m.hermitian_residual();
        if residual > tol.herm {
            return Err(Error::NotHermitian { residual });
        }
        let residual = m.matmul(&m).max_abs_diff(&m);
        if residual > tol.proj {
            return Err(Error::NotIdempotent { residual });
        }
        let tr = m.trace().re;
        let rank = libm::round(tr);
        let residual = (tr - rank).abs();
        if residual > tol.trace || rank < 0.0 {
            return Err(Error::NonIntegerRank { residual });
        }
        Ok(Self { matrix: m, rank: rank as usize })
    }

    /// Projection onto the span of orthonormal columns. Orthonormality is the caller's contract.
    pub(crate) fn from_orthonormal(cols: &[Vec<C64>], dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for v in cols {
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        Self { matrix: m, rank: cols.len() }
    }

    pub(crate) fn from_parts(matrix: CMatrix, rank: usize) -> Self {
        Self { matrix, rank }
    }

    /// Projection onto a single (not necessarily normalised) vector.
    pub fn onto(v: &[C64]) -> Result<Self> {
        let nrm = crate::matrix::norm(v);
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::NonFinite);
        }
        let u: Vec<C64> = v.iter().map(|z| z / nrm).collect();
        Ok(Self::from_orthonormal(&[u], v.len()))
    }

    /// E_ii, the i-th computational-basis projection in dimension n.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        m[(i, i)] = C64::new(1.0, 0.0);
        Self { matrix: m, rank: 1 }
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: CMatrix::identity(n), rank: n }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// I − P.
    pub fn complement(&self) -> Self {
        let n = self.dim();
        Self { matrix: &CMatrix::identity(n) - &self.matrix, rank: n - self.rank }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.kron(&other.matrix), rank: self.rank * other.rank }
    }

    pub fn conjugated_by(&self, u: &Unitary) -> Self {
        Self { matrix: u.matrix().conjugate(&self.matrix).hermitize(), rank: self.rank }
    }

    /// Orthonormal basis of the range, taken from the eigenvectors with eigenvalue ≈ 1.
    pub fn range_basis(&self) -> Result<Vec<Vec<C64>>> {
        let eig = eig_hermitian(&self.matrix, f64::INFINITY)?;
        Ok((0..self.rank).map(|j| eig.vectors.column(j)).collect())
    }
}

/// A unitary matrix, ‖U U† − I‖_max ≤ tol.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: CMatrix,
}

impl Unitary {
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        let n = m.require_square()?;
        let residual = m.matmul(&m.adjoint()).max_abs_diff(&CMatrix::identity(n));
        if residual > tol.unitary {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { matrix: m })
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self { matrix: m }
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: CMatrix::identity(n) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.matrix.column(j)
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.matmul(&other.matrix) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn maximally_mixed_qubit_is_valid() {
        let rho = DensityMatrix::validate(CMatrix::identity(2).scale_real(0.5), &tol()).unwrap();
        assert_eq!(rho.spectrum(), &[0.5, 0.5]);
    }

    #[test]
    fn diagonal_state_is_valid() {
        let rho = DensityMatrix::from_diagonal(&[0.6, 0.3, 0.1], &tol()).unwrap();
        assert_eq!(rho.spectrum(), &[0.6, 0.3, 0.1]);
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        let err = DensityMatrix::from_diagonal(&[0.7, 0.7, -0.4], &tol()).unwrap_err();
        assert!(matches!(err, Error::NotPositive { min_eigenvalue } if (min_eigenvalue + 0.4).abs() < 1e-12));
    }

    #[test]
    fn wrong_trace_and_asymmetry_rejected() {
        let err = DensityMatrix::from_diagonal(&[0.5, 0.4], &tol()).unwrap_err();
        assert!(matches!(err, Error::NotUnitTrace { residual } if (residual - 0.1).abs() < 1e-12));
        let mut m = CMatrix::from_real_diagonal(&[0.5, 0.5]);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(DensityMatrix::validate(m, &tol()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = DensityMatrix::from_diagonal(&[0.7, 0.3], &tol()).unwrap();
        let b = DensityMatrix::from_diagonal(&[0.2, 0.5, 0.3], &tol()).unwrap();
        let ab = a.tensor(&b);
        let a2 = ab.partial_trace(2, 3, Keep::First).unwrap();
        let b2 = ab.partial_trace(2, 3, Keep::Second).unwrap();
        assert!(a2.matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(b2.matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = DensityMatrix::pure(&[C64::new(s, 0.0), z, z, C64::new(s, 0.0)]).unwrap();
        for keep in [Keep::First, Keep::Second] {
            let r = bell.partial_trace(2, 2, keep).unwrap();
            assert!(r.matrix().max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(5);
        assert_eq!(
            rho.partial_trace(2, 3, Keep::First).unwrap_err(),
            Error::DimensionMismatch { expected: 6, got: 5 }
        );
    }

    #[test]
    fn projection_validation() {
        let p = Projection::new(CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]), &tol()).unwrap();
        assert_eq!(p.rank(), 1);
        let err = Projection::new(CMatrix::from_real_diagonal(&[0.5, 1.0]), &tol()).unwrap_err();
        assert!(matches!(err, Error::NotIdempotent { .. }));
        assert_eq!(Projection::new(CMatrix::zeros(2, 2), &tol()).unwrap().rank(), 0);
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states_is_one() {
        let a = DensityMatrix::from_diagonal(&[1.0, 0.0], &tol()).unwrap();
        let b = DensityMatrix::from_diagonal(&[0.0, 1.0], &tol()).unwrap();
        assert!((a.trace_distance(&b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn von_neumann_of_diagonal_state() {
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.5, 0.0], &tol()).unwrap();
        assert!((rho.von_neumann_entropy().unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
    }
}
