//! Seeded generators for unitaries, states and probability vectors.
//!
//! Every generator takes an explicit seed; independent consumers derive named substreams with
//! [`rng`] so that adding a draw in one place never shifts the draws somewhere else.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::linalg::qr;
use crate::matrix::CMatrix;
use crate::state::{DensityMatrix, Unitary};
use crate::{Error, Result, Tolerances, C64};

pub type Rng64 = ChaCha8Rng;

/// Substream labels used across the crate.
pub mod stream {
    pub const UNITARY: u64 = 1;
    pub const SPECTRUM: u64 = 2;
    pub const MINIMIZER: u64 = 3;
    pub const ROTATION: u64 = 4;
    pub const VERIFY: u64 = 5;
    pub const PROPS: u64 = 6;
    pub const DISTANCE: u64 = 7;
}

/// Deterministic generator for `(seed, stream)`.
pub fn rng(seed: u64, stream: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// A seed drawn from an existing generator, for handing to a seeded helper.
pub fn child_seed<R: Rng + ?Sized>(r: &mut R) -> u64 {
    r.random()
}

pub fn complex_gaussian<R: Rng + ?Sized>(r: &mut R) -> C64 {
    let a: f64 = r.sample(StandardNormal);
    let b: f64 = r.sample(StandardNormal);
    C64::new(a, b) * core::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary from an explicit generator.
///
/// QR of a complex Ginibre matrix with the diagonal of R rotated to the positive reals.
pub fn haar_unitary_from<R: Rng + ?Sized>(n: usize, r: &mut R) -> Unitary {
    loop {
        let mut z = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                z[(i, j)] = complex_gaussian(r);
            }
        }
        let Ok((mut q, rr)) = qr(&z) else { continue };
        for j in 0..n {
            let d = rr[(j, j)];
            let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
        return Unitary::new_unchecked(q);
    }
}

/// Haar-random n×n unitary, deterministic in `seed`.
pub fn haar_random_unitary(n: usize, seed: u64) -> Result<Unitary> {
    if n == 0 {
        return Err(Error::BadRank { rank: 0, dim: 0 });
    }
    Ok(haar_unitary_from(n, &mut rng(seed, stream::UNITARY)))
}

/// Uniform point of the probability simplex of dimension `k`.
pub fn random_probability_vector<R: Rng + ?Sized>(k: usize, r: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| r.sample::<f64, _>(Exp1).max(1e-300)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// U diag(spectrum) U† for a Haar U.
pub fn state_with_spectrum<R: Rng + ?Sized>(spectrum: &[f64], r: &mut R, tol: &Tolerances) -> Result<DensityMatrix> {
    let u = haar_unitary_from(spectrum.len(), r);
    let m = u.matrix().conjugate(&CMatrix::from_real_diagonal(spectrum)).hermitize();
    DensityMatrix::validate(m, tol)
}

/// Random state of the given rank: a uniform spectrum on `rank` entries rotated by a Haar unitary.
pub fn random_density(n: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if rank == 0 || rank > n {
        return Err(Error::BadRank { rank, dim: n });
    }
    let mut rs = rng(seed, stream::SPECTRUM);
    let mut spectrum = random_probability_vector(rank, &mut rs);
    spectrum.resize(n, 0.0);
    let mut ru = rng(seed, stream::UNITARY);
    state_with_spectrum(&spectrum, &mut ru, &Tolerances::default())
}

/// A random anti-Hermitian matrix with Gaussian entries, supported on the rows/columns for
/// which `mask` is true.
pub fn random_anti_hermitian<R: Rng + ?Sized>(n: usize, mask: &[bool], r: &mut R) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            if !(mask[i] && mask[j]) {
                continue;
            }
            if i == j {
                let x: f64 = r.sample(StandardNormal);
                a[(i, i)] = C64::new(0.0, x);
            } else {
                let z = complex_gaussian(r);
                a[(i, j)] = z;
                a[(j, i)] = -z.conj();
            }
        }
    }
    a
}

/// A random unit vector (Haar on the sphere).
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, r: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| complex_gaussian(r)).collect();
    let nrm = crate::matrix::norm(&v);
    v.into_iter().map(|z| z / nrm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_is_a_phase() {
        let u = haar_random_unitary(1, 3).unwrap();
        assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        assert_eq!(haar_random_unitary(4, 99).unwrap(), haar_random_unitary(4, 99).unwrap());
        assert_ne!(haar_random_unitary(4, 99).unwrap(), haar_random_unitary(4, 100).unwrap());
    }

    #[test]
    fn haar_output_is_unitary() {
        for seed in 0..20 {
            let u = haar_random_unitary(6, seed).unwrap();
            assert!(Unitary::new(u.into_matrix(), &Tolerances::default()).is_ok());
        }
    }

    #[test]
    fn pure_and_full_rank_states() {
        let p = random_density(4, 1, 5).unwrap();
        assert!(p.matrix().matmul(p.matrix()).max_abs_diff(p.matrix()) < 1e-12);
        let f = random_density(4, 4, 5).unwrap();
        assert!(f.eigen().unwrap().values[3] > 0.0);
    }

    #[test]
    fn bad_rank() {
        assert_eq!(random_density(3, 4, 0).unwrap_err(), Error::BadRank { rank: 4, dim: 3 });
        assert_eq!(random_density(3, 0, 0).unwrap_err(), Error::BadRank { rank: 0, dim: 3 });
    }

    #[test]
    fn generator_soundness_sweep() {
        let tol = Tolerances::default();
        for n in 2..=6 {
            for seed in 0..100 {
                let rank = 1 + (seed as usize) % n;
                let rho = random_density(n, rank, seed).unwrap();
                assert!(DensityMatrix::validate(rho.into_matrix(), &tol).is_ok());
            }
        }
    }
}
