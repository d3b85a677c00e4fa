//! Distance between unitarily equivalent contexts.
//!
//! For contexts V = {P_i} and W = {Q_j} with the same rank profile, every conjugator carrying V
//! onto W has the form U = Σ_i B_σ(i) G_i A_i†, where A_i, B_j are orthonormal bases of the
//! ranges, σ is a rank-preserving matching and G_i ∈ U(r_i) is the gauge freedom inside each
//! block (for rank-one blocks, a phase). The distance is min ‖U − I‖_max over σ and the gauges.
//!
//! The minimisation over σ is exhaustive for k ≤ 8 projections (candidates are scored with the
//! Frobenius-optimal gauge, the best few are refined). Rank-one gauges are refined by exact
//! one-dimensional phase minimisation, larger blocks by local random search. The result is an
//! upper bound on the true minimum; both directions V→W and W→V are optimised and the smaller
//! value returned, which makes the computed distance exactly symmetric.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::context::Context;
use crate::linalg::{eig_hermitian, expm_anti_hermitian};
use crate::matrix::CMatrix;
use crate::random::{random_anti_hermitian, rng, stream};
use crate::{Error, Result, C64};

const MAX_ENUMERATED: usize = 8;
const REFINED_CANDIDATES: usize = 6;
const PHASE_GRID: usize = 360;
const MAX_PASSES: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Value(f64),
    /// No unitary carries one context onto the other.
    Incomparable,
}

impl Distance {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Self::Value(d) => Some(d),
            Self::Incomparable => None,
        }
    }
}

/// Approximates d(V, W). See the module documentation for the algorithm.
pub fn context_distance(v: &Context, w: &Context) -> Result<Distance> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: v.dim(), got: w.dim() });
    }
    let mut rv = v.ranks();
    let mut rw = w.ranks();
    rv.sort_unstable();
    rw.sort_unstable();
    if rv != rw {
        return Ok(Distance::Incomparable);
    }
    let forward = one_direction(v, w)?;
    let backward = one_direction(w, v)?;
    Ok(Distance::Value(forward.min(backward)))
}

struct Blocks {
    bases: Vec<CMatrix>,
    ranks: Vec<usize>,
}

fn blocks(ctx: &Context) -> Result<Blocks> {
    let mut bases = Vec::with_capacity(ctx.len());
    for p in ctx.projections() {
        let cols = p.range_basis()?;
        bases.push(CMatrix::from_columns(&cols));
    }
    Ok(Blocks { bases, ranks: ctx.ranks() })
}

/// Polar factor of a square matrix, M (M†M)^{-1/2}; identity if M is numerically singular.
fn polar(m: &CMatrix) -> Result<CMatrix> {
    let r = m.rows();
    let eig = eig_hermitian(&m.adjoint().matmul(m).hermitize(), f64::INFINITY)?;
    if eig.values.iter().any(|&s| s <= 1e-24) {
        return Ok(CMatrix::identity(r));
    }
    let inv_sqrt: Vec<f64> = eig.values.iter().map(|&s| 1.0 / libm::sqrt(s)).collect();
    Ok(m.matmul(&eig.vectors.conjugate(&CMatrix::from_real_diagonal(&inv_sqrt))))
}

/// Rank-preserving matchings of source blocks onto target blocks.
fn matchings(src: &[usize], dst: &[usize]) -> Vec<Vec<usize>> {
    fn go(i: usize, src: &[usize], dst: &[usize], used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == src.len() {
            out.push(cur.clone());
            return;
        }
        for j in 0..dst.len() {
            if !used[j] && dst[j] == src[i] {
                used[j] = true;
                cur.push(j);
                go(i + 1, src, dst, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(0, src, dst, &mut vec![false; dst.len()], &mut Vec::new(), &mut out);
    out
}

/// Greedy matching by overlap Tr(P_i Q_j), used when exhaustive enumeration is too large.
fn greedy_matching(v: &Context, w: &Context) -> Vec<usize> {
    let k = v.len();
    let mut used = vec![false; k];
    let mut sigma = vec![0; k];
    for (slot, p) in sigma.iter_mut().zip(v.projections()) {
        let best = (0..k)
            .filter(|&j| !used[j] && w.projections()[j].rank() == p.rank())
            .max_by(|&a, &b| {
                let oa = p.matrix().trace_product(w.projections()[a].matrix()).re;
                let ob = p.matrix().trace_product(w.projections()[b].matrix()).re;
                oa.total_cmp(&ob)
            })
            .expect("rank profiles agree");
        used[best] = true;
        *slot = best;
    }
    sigma
}

struct Candidate {
    /// Per source block: B_σ(i) and the current gauge G_i.
    targets: Vec<CMatrix>,
    gauges: Vec<CMatrix>,
}

fn assemble(src: &Blocks, cand: &Candidate) -> CMatrix {
    let n = src.bases[0].rows();
    let mut u = CMatrix::zeros(n, n);
    for ((a, b), g) in src.bases.iter().zip(&cand.targets).zip(&cand.gauges) {
        u = &u + &b.matmul(g).matmul(&a.adjoint());
    }
    u
}

fn objective(u: &CMatrix) -> f64 {
    u.max_abs_diff(&CMatrix::identity(u.rows()))
}

fn one_direction(v: &Context, w: &Context) -> Result<f64> {
    let src = blocks(v)?;
    let dst = blocks(w)?;
    let sigmas = if v.len() <= MAX_ENUMERATED {
        matchings(&src.ranks, &dst.ranks)
    } else {
        vec![greedy_matching(v, w)]
    };

    let mut scored: Vec<(f64, Candidate)> = Vec::with_capacity(sigmas.len());
    for sigma in sigmas {
        let targets: Vec<CMatrix> = sigma.iter().map(|&j| dst.bases[j].clone()).collect();
        // Frobenius-optimal gauge: G_i = polar(B_i† A_i).
        let gauges = src
            .bases
            .iter()
            .zip(&targets)
            .map(|(a, b)| polar(&b.adjoint().matmul(a)))
            .collect::<Result<Vec<_>>>()?;
        let cand = Candidate { targets, gauges };
        scored.push((objective(&assemble(&src, &cand)), cand));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut r = rng(0, stream::DISTANCE);
    let mut best = f64::INFINITY;
    for (_, mut cand) in scored.into_iter().take(REFINED_CANDIDATES) {
        best = best.min(refine(&src, &mut cand, &mut r)?);
    }
    Ok(best)
}

/// min over φ of max_ab |C_ab + e^{iφ} D_ab|: dense grid, then golden-section refinement.
fn best_phase(c: &CMatrix, d: &CMatrix) -> (f64, f64) {
    let eval = |phi: f64| -> f64 {
        let e = C64::new(libm::cos(phi), libm::sin(phi));
        c.entries().iter().zip(d.entries()).map(|(&x, &y)| (x + e * y).norm()).fold(0.0, f64::max)
    };
    let step = 2.0 * core::f64::consts::PI / PHASE_GRID as f64;
    let (mut best_phi, mut best_val) = (0.0, eval(0.0));
    for k in 1..PHASE_GRID {
        let phi = k as f64 * step;
        let val = eval(phi);
        if val < best_val {
            best_phi = phi;
            best_val = val;
        }
    }
    let (mut a, mut b) = (best_phi - step, best_phi + step);
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    for _ in 0..80 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if eval(x1) < eval(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let phi = 0.5 * (a + b);
    let val = eval(phi);
    if val < best_val {
        (phi, val)
    } else {
        (best_phi, best_val)
    }
}

fn refine<R: Rng>(src: &Blocks, cand: &mut Candidate, r: &mut R) -> Result<f64> {
    let n = src.bases[0].rows();
    let id = CMatrix::identity(n);
    let mut current = objective(&assemble(src, cand));
    for _ in 0..MAX_PASSES {
        let before = current;
        for i in 0..src.bases.len() {
            // The i-th block term, D = B_i G_i A_i†; everything else, minus I, is C.
            let term = cand.targets[i].matmul(&cand.gauges[i]).matmul(&src.bases[i].adjoint());
            let rest = &(&assemble(src, cand) - &term) - &id;
            let (phi, val) = best_phase(&rest, &term);
            if val < current {
                cand.gauges[i] = cand.gauges[i].scale(C64::new(libm::cos(phi), libm::sin(phi)));
                current = val;
            }
            let rank = src.ranks[i];
            if rank > 1 {
                let mut scale = 0.1;
                while scale > 1e-6 {
                    let a = random_anti_hermitian(rank, &vec![true; rank], r).scale_real(scale);
                    let trial = cand.gauges[i].matmul(&expm_anti_hermitian(&a)?);
                    let old = core::mem::replace(&mut cand.gauges[i], trial);
                    let val = objective(&assemble(src, cand));
                    if val < current {
                        current = val;
                    } else {
                        cand.gauges[i] = old;
                        scale *= 0.5;
                    }
                }
            }
        }
        if before - current <= 1e-14 {
            break;
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{random_context, random_context_with_ranks, MaximalContext};
    use crate::random::haar_unitary_from;
    use crate::state::Unitary;

    #[test]
    fn distance_to_itself_is_zero() {
        let mut r = rng(1, 0);
        for n in 2..6 {
            let v = random_context(n, &mut r);
            let d = context_distance(&v, &v).unwrap().value().unwrap();
            assert!(d < 1e-12, "{d}");
        }
    }

    #[test]
    fn relisting_does_not_matter() {
        let mut r = rng(2, 0);
        let u = haar_unitary_from(3, &mut r);
        let a = Context::from_unitary_partition(&u, &[vec![0], vec![1], vec![2]]).unwrap();
        let b = Context::from_unitary_partition(&u, &[vec![2], vec![0], vec![1]]).unwrap();
        let d = context_distance(&a, &b).unwrap().value().unwrap();
        assert!(d < 1e-12);
        let w = MaximalContext::from_unitary(&haar_unitary_from(3, &mut r)).unwrap();
        let d1 = context_distance(&a, w.context()).unwrap().value().unwrap();
        let d2 = context_distance(&b, w.context()).unwrap().value().unwrap();
        assert!((d1 - d2).abs() < 1e-9, "{d1} vs {d2}");
    }

    #[test]
    fn bounded_by_the_conjugator() {
        let mut r = rng(3, 0);
        for scale in [0.05, 0.3, 2.0] {
            let v = random_context_with_ranks(&[1, 2, 1], &mut r);
            let a = random_anti_hermitian(4, &[true; 4], &mut r).scale_real(scale);
            let u = Unitary::new(expm_anti_hermitian(&a).unwrap(), &Default::default()).unwrap();
            let w = v.conjugated_by(&u);
            let d = context_distance(&v, &w).unwrap().value().unwrap();
            let bound = u.matrix().max_abs_diff(&CMatrix::identity(4));
            assert!(d <= bound + 1e-9, "d = {d}, bound = {bound}");
        }
    }

    #[test]
    fn different_rank_profiles_are_incomparable() {
        let mut r = rng(4, 0);
        let a = random_context_with_ranks(&[1, 3], &mut r);
        let b = random_context_with_ranks(&[2, 2], &mut r);
        assert_eq!(context_distance(&a, &b).unwrap(), Distance::Incomparable);
        let c = random_context_with_ranks(&[1, 2], &mut r);
        assert!(matches!(context_distance(&a, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn symmetric() {
        let mut r = rng(5, 0);
        for _ in 0..5 {
            let v = random_context(4, &mut r);
            let u = haar_unitary_from(4, &mut r);
            let w = v.conjugated_by(&u);
            let d1 = context_distance(&v, &w).unwrap().value().unwrap();
            let d2 = context_distance(&w, &v).unwrap().value().unwrap();
            assert!((d1 - d2).abs() <= 1e-6);
        }
    }
}
