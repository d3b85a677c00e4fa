//! Hermitian eigen-decomposition, QR, and the exponential of anti-Hermitian matrices.
//!
//! The eigensolver is cyclic complex Jacobi: slow asymptotically, but unconditionally accurate on
//! the small matrices this crate deals with, and independent of every entropy code path (it is
//! the reference that von Neumann extraction is checked against).

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::matrix::{inner, norm, CMatrix};
use crate::{Error, Result, C64};

const MAX_SWEEPS: usize = 64;
/// Eigenvalues closer than this (relative to max(1, |λ|)) are treated as degenerate for ordering.
const TIE_EPS: f64 = 1e-12;

/// Eigenvalues in descending order and the unitary whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Recomposes `V diag(λ) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_real_diagonal(&self.values);
        self.vectors.conjugate(&d)
    }
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending; eigenvectors are phase-fixed so that their first
/// component above 1e-12 in modulus is real and positive, and degenerate eigenvalues are ordered
/// by the lexicographically larger eigenvector first. The output is therefore deterministic even
/// for degenerate spectra.
pub fn eig_hermitian(m: &CMatrix, herm_tol: f64) -> Result<HermitianEigen> {
    let n = m.require_square()?;
    let residual = m.hermitian_residual();
    if residual > herm_tol {
        return Err(Error::NotHermitian { residual });
    }
    let mut a = m.hermitize();
    let mut v = CMatrix::identity(n);

    let scale: f64 = a.entries().iter().map(|z| z.norm_sqr()).sum();
    let threshold = (f64::EPSILON * f64::EPSILON) * scale.max(f64::MIN_POSITIVE);

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence);
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|j| {
            let mut col = v.column(j);
            fix_phase(&mut col);
            (a[(j, j)].re, col)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    // Re-order runs of (numerically) equal eigenvalues by their eigenvectors.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end - 1].0 - pairs[end].0 <= TIE_EPS * pairs[end - 1].0.abs().max(1.0) {
            end += 1;
        }
        pairs[start..end].sort_by(|x, y| lexicographic(&y.1, &x.1));
        start = end;
    }

    let values = pairs.iter().map(|p| p.0).collect();
    let cols: Vec<Vec<C64>> = pairs.into_iter().map(|p| p.1).collect();
    Ok(HermitianEigen { values, vectors: CMatrix::from_columns(&cols) })
}

fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let n = a.rows();
    // Phase rotation making a_pq real, followed by the classical real Jacobi rotation.
    let e_conj = (apq / mag).conj();
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = if theta >= 0.0 { 1.0 } else { -1.0 } / (theta.abs() + libm::sqrt(theta * theta + 1.0));
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;
    let j00 = C64::new(c, 0.0);
    let j01 = C64::new(s, 0.0);
    let j10 = e_conj * (-s);
    let j11 = e_conj * c;

    for r in 0..n {
        let (x, y) = (a[(r, p)], a[(r, q)]);
        a[(r, p)] = x * j00 + y * j10;
        a[(r, q)] = x * j01 + y * j11;
        let (x, y) = (v[(r, p)], v[(r, q)]);
        v[(r, p)] = x * j00 + y * j10;
        v[(r, q)] = x * j01 + y * j11;
    }
    for r in 0..n {
        let (x, y) = (a[(p, r)], a[(q, r)]);
        a[(p, r)] = j00.conj() * x + j10.conj() * y;
        a[(q, r)] = j01.conj() * x + j11.conj() * y;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Multiplies `v` by a unit phase so its first component above 1e-12 is real positive.
pub fn fix_phase(v: &mut [C64]) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12) {
        let ph = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= ph;
        }
    }
}

fn lexicographic(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Thin QR by modified Gram–Schmidt with one re-orthogonalisation pass.
///
/// Returns `(Q, R)` with `R` upper triangular and a non-negative real diagonal. Columns that are
/// numerically dependent produce an error.
pub fn qr(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut q_cols: Vec<Vec<C64>> = Vec::with_capacity(cols);
    let mut r = CMatrix::zeros(cols, cols);
    for j in 0..cols {
        let mut v = m.column(j);
        for _pass in 0..2 {
            for (k, qk) in q_cols.iter().enumerate() {
                let proj = inner(qk, &v);
                r[(k, j)] += proj;
                for (x, &y) in v.iter_mut().zip(qk) {
                    *x -= proj * y;
                }
            }
        }
        let nv = norm(&v);
        if nv <= 1e-300 || rows < cols {
            return Err(Error::NoConvergence);
        }
        r[(j, j)] = C64::new(nv, 0.0);
        for x in v.iter_mut() {
            *x /= nv;
        }
        q_cols.push(v);
    }
    Ok((CMatrix::from_columns(&q_cols), r))
}

/// Re-orthonormalises the columns of a nearly unitary matrix (removes accumulated drift).
pub fn orthonormalize(u: &CMatrix) -> Result<CMatrix> {
    Ok(qr(u)?.0)
}

/// `exp(A)` for anti-Hermitian `A`, computed through the eigenbasis of the Hermitian `−iA`.
pub fn expm_anti_hermitian(a: &CMatrix) -> Result<CMatrix> {
    let h = a.scale(C64::new(0.0, -1.0));
    let eig = eig_hermitian(&h, 1e-8)?;
    let n = a.rows();
    let mut d = CMatrix::zeros(n, n);
    for (i, &l) in eig.values.iter().enumerate() {
        d[(i, i)] = C64::new(libm::cos(l), libm::sin(l));
    }
    Ok(eig.vectors.conjugate(&d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm4() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        let vals = [
            (0, 0, 1.0, 0.0),
            (1, 1, -0.5, 0.0),
            (2, 2, 2.0, 0.0),
            (3, 3, 0.25, 0.0),
            (0, 1, 0.3, -0.7),
            (0, 2, -1.1, 0.2),
            (0, 3, 0.05, 0.9),
            (1, 2, 0.4, 0.4),
            (1, 3, -0.6, 0.0),
            (2, 3, 0.0, -0.8),
        ];
        for &(i, j, re, im) in &vals {
            m[(i, j)] = C64::new(re, im);
            m[(j, i)] = C64::new(re, -im);
        }
        m
    }

    #[test]
    fn diagonal_input_sorted_descending() {
        let e = eig_hermitian(&CMatrix::from_real_diagonal(&[0.2, 0.8]), 1e-10).unwrap();
        assert_eq!(e.values, [0.8, 0.2]);
        // permutation eigenvectors
        assert!((e.vectors[(1, 0)].re - 1.0).abs() < 1e-15);
        assert!((e.vectors[(0, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one_projection_spectrum() {
        let m = CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let e = eig_hermitian(&m, 1e-10).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!(e.values[1].abs() < 1e-14);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[(0, 0)].re - s).abs() < 1e-14);
        assert!((e.vectors[(1, 0)].re - s).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_residual_random_hermitian() {
        let m = herm4();
        let e = eig_hermitian(&m, 1e-10).unwrap();
        assert!(e.reconstruct().max_abs_diff(&m) <= 1e-10);
        let u = &e.vectors;
        assert!(u.matmul(&u.adjoint()).max_abs_diff(&CMatrix::identity(4)) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(eig_hermitian(&m, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn degenerate_spectrum_is_deterministic() {
        let e = eig_hermitian(&CMatrix::identity(3).scale_real(0.5), 1e-10).unwrap();
        assert_eq!(e.vectors, CMatrix::identity(3));
    }

    #[test]
    fn qr_factors_reproduce_input() {
        let m = herm4();
        let (q, r) = qr(&m).unwrap();
        assert!(q.matmul(&r).max_abs_diff(&m) < 1e-12);
        assert!(q.adjoint().matmul(&q).max_abs_diff(&CMatrix::identity(4)) < 1e-12);
        for i in 0..4 {
            assert!(r[(i, i)].re > 0.0 && r[(i, i)].im == 0.0);
            for j in 0..i {
                assert_eq!(r[(i, j)], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn exp_of_anti_hermitian_is_unitary() {
        let a = herm4().scale(C64::new(0.0, 1.0));
        let u = expm_anti_hermitian(&a).unwrap();
        assert!(u.matmul(&u.adjoint()).max_abs_diff(&CMatrix::identity(4)) < 1e-12);
        // exp(i·θ·σx) closed form
        let x = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).scale(C64::new(0.0, 0.3));
        let u = expm_anti_hermitian(&x).unwrap();
        assert!((u[(0, 0)].re - libm::cos(0.3)).abs() < 1e-14);
        assert!((u[(0, 1)].im - libm::sin(0.3)).abs() < 1e-14);
    }
}
