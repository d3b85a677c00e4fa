//! The measure a state induces on contexts: P ↦ Tr(ρP), restricted to each context.

use alloc::vec::Vec;

use rand::Rng;

use crate::context::{random_context, random_maximal_context, Context};
use crate::matrix::CMatrix;
use crate::random::{haar_unitary_from, rng, stream};
use crate::state::{DensityMatrix, Keep, Projection, Unitary};
use crate::{Error, Result, Tolerances, C64};

/// Probability vector of a state at a context, in the context's canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextProbability {
    pub context: Context,
    pub probs: Vec<f64>,
}

/// Outcome of a numerical check: the worst residual over all trials and whether it met the
/// threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: &'static str,
    pub max_residual: f64,
    pub trials: usize,
    pub pass: bool,
}

impl CheckReport {
    pub fn from_residual(check: &'static str, max_residual: f64, trials: usize, threshold: f64) -> Self {
        Self { check, max_residual, trials, pass: max_residual <= threshold }
    }
}

/// m(X) = Re Tr(ρX) for an arbitrary operator, no clamping.
pub fn raw_measure(rho: &DensityMatrix, x: &CMatrix) -> f64 {
    rho.matrix().trace_product(x).re
}

/// Snaps a probability into [0, 1] when it overshoots by at most `tol`; larger excursions are a
/// numerical breakdown.
pub fn clamp_probability(p: f64, tol: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else if p >= -tol && p <= 1.0 + tol {
        Ok(p.clamp(0.0, 1.0))
    } else {
        Err(Error::NumericalBreakdown { value: p })
    }
}

/// Tr(ρ P_i) for every projection of the context.
pub fn probabilities(rho: &DensityMatrix, ctx: &Context, tol: &Tolerances) -> Result<Vec<f64>> {
    if rho.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch { expected: ctx.dim(), got: rho.dim() });
    }
    ctx.projections().iter().map(|p| clamp_probability(raw_measure(rho, p.matrix()), tol.prob)).collect()
}

pub fn measure_eval(rho: &DensityMatrix, ctx: &Context, tol: &Tolerances) -> Result<ContextProbability> {
    Ok(ContextProbability { context: ctx.clone(), probs: probabilities(rho, ctx, tol)? })
}

/// Random orthogonal pairs inside random maximal contexts: checks m(I) = 1, m(0) = 0,
/// m(P + Q) = m(P) + m(Q) and m(P) ≤ m(P + Q). Failures are reported, not raised.
pub fn check_finite_additivity(rho: &DensityMatrix, trials: usize, seed: u64) -> CheckReport {
    let n = rho.dim();
    let mut r = rng(seed, stream::PROPS);
    let mut worst: f64 = 0.0;
    worst = worst.max((raw_measure(rho, &CMatrix::identity(n)) - 1.0).abs());
    worst = worst.max(raw_measure(rho, &CMatrix::zeros(n, n)).abs());
    for _ in 0..trials {
        let ctx = random_maximal_context(n, &mut r);
        let ps = ctx.context().projections();
        // Assign each basis projection to P, Q or neither; P and Q nonempty.
        let labels: Vec<u8> = loop {
            let l: Vec<u8> = (0..n).map(|_| r.random_range(0..3u8)).collect();
            if l.contains(&0) && l.contains(&1) {
                break l;
            }
        };
        let mut p = CMatrix::zeros(n, n);
        let mut q = CMatrix::zeros(n, n);
        for (proj, &l) in ps.iter().zip(&labels) {
            match l {
                0 => p = &p + proj.matrix(),
                1 => q = &q + proj.matrix(),
                _ => {}
            }
        }
        let join = &p + &q;
        let (mp, mq, mj) = (raw_measure(rho, &p), raw_measure(rho, &q), raw_measure(rho, &join));
        worst = worst.max((mj - mp - mq).abs());
        worst = worst.max((mp - mj).max(0.0)).max((mq - mj).max(0.0));
        worst = worst.max((mp.min(0.0)).abs()).max((mj - 1.0).max(0.0));
    }
    CheckReport::from_residual("finite_additivity", worst, trials, 1e-10)
}

/// The value of a projection does not depend on the context it is embedded in. P is completed
/// to a context {P, complement lines}; independently, a maximal context splits P's range and its
/// complement along rotated bases, and P is read there as the sum of the lines inside it.
pub fn check_context_independence(rho: &DensityMatrix, trials: usize, seed: u64, tol: &Tolerances) -> Result<CheckReport> {
    let n = rho.dim();
    let mut r = rng(seed, stream::PROPS + 1);
    let mut worst: f64 = 0.0;
    let mix = |cols: &[Vec<C64>], w: &Unitary| -> Vec<Vec<C64>> {
        (0..cols.len())
            .map(|k| {
                let mut v = alloc::vec![C64::new(0.0, 0.0); n];
                for (l, col) in cols.iter().enumerate() {
                    let c = w.matrix()[(l, k)];
                    for (x, &y) in v.iter_mut().zip(col) {
                        *x += c * y;
                    }
                }
                v
            })
            .collect()
    };
    let line = |c: &Vec<C64>| Projection::from_orthonormal(core::slice::from_ref(c), n);
    for _ in 0..trials {
        let u = haar_unitary_from(n, &mut r);
        let rank = r.random_range(1..n);
        let cols: Vec<Vec<C64>> = (0..n).map(|j| u.column(j)).collect();
        let p = Projection::from_orthonormal(&cols[..rank], n);
        let inside = mix(&cols[..rank], &haar_unitary_from(rank, &mut r));
        let outside = mix(&cols[rank..], &haar_unitary_from(n - rank, &mut r));

        let mut coarse = alloc::vec![p.clone()];
        coarse.extend(cols[rank..].iter().map(line));
        let coarse = Context::from_projections(coarse, tol)?;
        let probs = probabilities(rho, &coarse, tol)?;
        let idx = coarse
            .projections()
            .iter()
            .position(|q| q.matrix().max_abs_diff(p.matrix()) <= 1e-12)
            .ok_or(Error::NotARefinement)?;

        let inside_lines: Vec<Projection> = inside.iter().map(line).collect();
        let mut fine = inside_lines.clone();
        fine.extend(outside.iter().map(line));
        let fine = Context::from_projections(fine, tol)?;
        let fine_probs = probabilities(rho, &fine, tol)?;
        let summed: f64 = fine
            .projections()
            .iter()
            .zip(&fine_probs)
            .filter(|(q, _)| inside_lines.iter().any(|l| l.matrix().max_abs_diff(q.matrix()) <= 1e-12))
            .map(|(_, v)| v)
            .sum();
        worst = worst.max((probs[idx] - summed).abs());
    }
    Ok(CheckReport::from_residual("context_independence", worst, trials, 1e-10))
}

/// μ_ρ at V ⊗ {I_m} against μ_{ρ₁} at V, and μ_ρ at {I_n} ⊗ W against μ_{ρ₂} at W.
pub fn check_partial_trace_compat(
    rho: &DensityMatrix,
    n: usize,
    m: usize,
    v: &Context,
    w: &Context,
    tol: &Tolerances,
) -> Result<CheckReport> {
    if v.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.dim() });
    }
    if w.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: w.dim() });
    }
    let rho1 = rho.partial_trace(n, m, Keep::First)?;
    let rho2 = rho.partial_trace(n, m, Keep::Second)?;
    let lifted_v = v.lift_first(m);
    let lifted_w = w.lift_second(n);
    let mut worst: f64 = 0.0;
    // Lifting preserves canonical order only up to ties, so match projections explicitly.
    for (ctx, small, reduced, first) in [(&lifted_v, v, &rho1, true), (&lifted_w, w, &rho2, false)] {
        let big = probabilities(rho, ctx, tol)?;
        let small_probs = probabilities(reduced, small, tol)?;
        for (p, &sp) in small.projections().iter().zip(&small_probs) {
            let lifted = if first { p.tensor(&Projection::identity(m)) } else { Projection::identity(n).tensor(p) };
            let idx = ctx
                .projections()
                .iter()
                .position(|q| q.matrix().max_abs_diff(lifted.matrix()) <= 1e-12)
                .ok_or(Error::NotARefinement)?;
            worst = worst.max((big[idx] - sp).abs());
        }
    }
    Ok(CheckReport::from_residual("partial_trace_compat", worst, 1, 1e-10))
}

/// Random-context battery for [`check_partial_trace_compat`] on an n×m composite.
pub fn partial_trace_battery(rho: &DensityMatrix, n: usize, m: usize, trials: usize, seed: u64, tol: &Tolerances) -> Result<CheckReport> {
    let mut r = rng(seed, stream::PROPS + 2);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let v = random_context(n, &mut r);
        let w = random_context(m, &mut r);
        worst = worst.max(check_partial_trace_compat(rho, n, m, &v, &w, tol)?.max_residual);
    }
    Ok(CheckReport::from_residual("partial_trace_compat", worst, trials, 1e-10))
}

/// Probabilities of U ρ U† at U V U†, for covariance checks.
pub fn conjugated_probabilities(rho: &DensityMatrix, ctx: &Context, u: &Unitary, tol: &Tolerances) -> Result<Vec<f64>> {
    probabilities(&rho.conjugated_by(u), &ctx.conjugated_by(u), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::refines;
    use crate::random::random_density;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn diagonal_state_in_its_basis() {
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.3, 0.2], &tol()).unwrap();
        let cp = measure_eval(&rho, &Context::computational(3).unwrap(), &tol()).unwrap();
        assert_eq!(cp.probs, [0.5, 0.3, 0.2]);
    }

    #[test]
    fn maximally_mixed_gives_rank_fractions() {
        let rho = DensityMatrix::maximally_mixed(5);
        let mut r = rng(4, 0);
        for _ in 0..20 {
            let ctx = random_context(5, &mut r);
            let p = probabilities(&rho, &ctx, &tol()).unwrap();
            for (pi, rank) in p.iter().zip(ctx.ranks()) {
                assert!((pi - rank as f64 / 5.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pure_state_in_containing_context() {
        let mut r = rng(9, 0);
        let u = haar_unitary_from(3, &mut r);
        let rho = DensityMatrix::pure(&u.column(1)).unwrap();
        let ctx = crate::context::MaximalContext::from_unitary(&u).unwrap();
        let p = probabilities(&rho, ctx.context(), &tol()).unwrap();
        let ones = p.iter().filter(|&&x| (x - 1.0).abs() < 1e-12).count();
        let zeros = p.iter().filter(|&&x| x.abs() < 1e-12).count();
        assert_eq!((ones, zeros), (1, 2));
    }

    #[test]
    fn dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(2);
        let err = measure_eval(&rho, &Context::computational(3).unwrap(), &tol()).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, got: 2 });
    }

    #[test]
    fn clamping_policy() {
        assert_eq!(clamp_probability(-1e-12, 1e-9).unwrap(), 0.0);
        assert_eq!(clamp_probability(1.0 + 1e-12, 1e-9).unwrap(), 1.0);
        assert_eq!(clamp_probability(1e-12, 1e-9).unwrap(), 1e-12);
        assert!(matches!(clamp_probability(-1e-6, 1e-9), Err(Error::NumericalBreakdown { .. })));
    }

    #[test]
    fn additivity_and_independence() {
        for seed in 0..5 {
            let rho = random_density(4, 1 + seed as usize % 4, seed).unwrap();
            assert!(check_finite_additivity(&rho, 50, seed).pass);
            assert!(check_context_independence(&rho, 20, seed, &tol()).unwrap().pass);
        }
    }

    #[test]
    fn partial_trace_compat_on_product_and_bell() {
        let a = DensityMatrix::from_diagonal(&[0.7, 0.3], &tol()).unwrap();
        let b = random_density(3, 3, 1).unwrap();
        let v = Context::computational(2).unwrap();
        let w = random_context(3, &mut rng(2, 0));
        let rep = check_partial_trace_compat(&a.tensor(&b), 2, 3, &v, &w, &tol()).unwrap();
        assert!(rep.pass, "{rep:?}");

        let s = core::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = DensityMatrix::pure(&[C64::new(s, 0.0), z, z, C64::new(s, 0.0)]).unwrap();
        let p = probabilities(&bell, &v.lift_first(2), &tol()).unwrap();
        assert!(p.iter().all(|&x| (x - 0.5).abs() < 1e-15));
        assert!(check_partial_trace_compat(&bell, 2, 2, &v, &v, &tol()).unwrap().pass);
    }

    #[test]
    fn coarse_graining_consistency() {
        let mut r = rng(12, 0);
        let rho = random_density(5, 5, 3).unwrap();
        for _ in 0..20 {
            let fine = random_maximal_context(5, &mut r);
            let part = crate::context::random_partition(5, &mut r);
            let coarse = fine.context().coarsen(&part).unwrap();
            let pi = refines(fine.context(), &coarse, &tol()).unwrap();
            let pf = probabilities(&rho, fine.context(), &tol()).unwrap();
            let pc = probabilities(&rho, &coarse, &tol()).unwrap();
            for (g, &c) in pi.iter().zip(&pc) {
                let s: f64 = g.iter().map(|&j| pf[j]).sum();
                assert!((s - c).abs() < 1e-12);
            }
        }
    }
}
