//! Property batteries: the structural claims about contextual entropy checked over random
//! states and contexts. Every battery returns a [`CheckReport`]; violations are data, not errors.

use alloc::vec::Vec;

use rand::Rng;

use crate::context::{random_context, random_context_with_ranks, random_partition, split_context, Context};
use crate::entropy::{coarse_grain, contextual_entropy, check_recursion, entropy_unchecked, EntropyKind};
use crate::measure::{check_context_independence, check_finite_additivity, partial_trace_battery, CheckReport};
use crate::random::{child_seed, haar_unitary_from, random_anti_hermitian, random_density, random_probability_vector, rng, stream, Rng64};
use crate::linalg::expm_anti_hermitian;
use crate::matrix::CMatrix;
use crate::state::{DensityMatrix, Keep, Unitary};
use crate::{Error, Result, Tolerances};

/// Residual threshold for the inequality batteries.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Residual threshold for the identity batteries.
pub const IDENTITY_TOL: f64 = 1e-10;

fn random_state(n: usize, r: &mut Rng64) -> Result<DensityMatrix> {
    let rank = r.random_range(1..=n);
    random_density(n, rank, child_seed(r))
}

fn battery_rng(seed: u64, offset: u64) -> Rng64 {
    rng(seed, (stream::PROPS << 16) + offset)
}

/// E(V) ≤ E(V′) for a random context V′ and a random coarsening V of it.
pub fn monotonicity(n: usize, kind: EntropyKind, trials: usize, seed: u64) -> Result<CheckReport> {
    let tol = Tolerances::default();
    let mut r = battery_rng(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let rho = random_state(n, &mut r)?;
        let fine = random_context(n, &mut r);
        let coarse = fine.coarsen(&random_partition(fine.len(), &mut r))?;
        let gap = contextual_entropy(&rho, &coarse, kind, &tol)? - contextual_entropy(&rho, &fine, kind, &tol)?;
        worst = worst.max(gap.max(0.0));
    }
    Ok(CheckReport::from_residual("monotonicity", worst, trials, INEQUALITY_SLACK))
}

/// Residual of the Shannon recursion formula on random refinement pairs.
pub fn recursion(n: usize, trials: usize, seed: u64) -> Result<CheckReport> {
    let tol = Tolerances::default();
    let mut r = battery_rng(seed, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let rho = random_state(n, &mut r)?;
        let fine = random_context(n, &mut r);
        let coarse = fine.coarsen(&random_partition(fine.len(), &mut r))?;
        worst = worst.max(check_recursion(&rho, &coarse, &fine, &tol)?);
    }
    Ok(CheckReport::from_residual("recursion", worst, trials, INEQUALITY_SLACK))
}

/// E_ρ(V) = E_{UρU†}(UVU†).
pub fn equivariance(n: usize, kind: EntropyKind, trials: usize, seed: u64) -> Result<CheckReport> {
    let tol = Tolerances::default();
    let mut r = battery_rng(seed, 3);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let rho = random_state(n, &mut r)?;
        let ctx = random_context(n, &mut r);
        let u = haar_unitary_from(n, &mut r);
        let a = contextual_entropy(&rho, &ctx, kind, &tol)?;
        let b = contextual_entropy(&rho.conjugated_by(&u), &ctx.conjugated_by(&u), kind, &tol)?;
        worst = worst.max((a - b).abs());
    }
    Ok(CheckReport::from_residual("equivariance", worst, trials, IDENTITY_TOL))
}

/// E_{rρ+(1−r)σ}(V) ≥ r·E_ρ(V) + (1−r)·E_σ(V). Only asserted for Shannon and Rényi 0 < q ≤ 1.
pub fn concavity(n: usize, kind: EntropyKind, trials: usize, seed: u64) -> Result<CheckReport> {
    match kind {
        EntropyKind::Shannon => {}
        EntropyKind::Renyi(q) if q > 0.0 && q <= 1.0 => {}
        _ => return Err(Error::UnsupportedKind { kind: "concavity needs shannon or renyi with 0 < q <= 1" }),
    }
    let tol = Tolerances::default();
    let mut r = battery_rng(seed, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let rho = random_state(n, &mut r)?;
        let sigma = random_state(n, &mut r)?;
        let w: f64 = r.random();
        let ctx = random_context(n, &mut r);
        let mixed = contextual_entropy(&rho.mix(&sigma, w, &tol)?, &ctx, kind, &tol)?;
        let chord =
            w * contextual_entropy(&rho, &ctx, kind, &tol)? + (1.0 - w) * contextual_entropy(&sigma, &ctx, kind, &tol)?;
        worst = worst.max((chord - mixed).max(0.0));
    }
    Ok(CheckReport::from_residual("concavity", worst, trials, INEQUALITY_SLACK))
}

/// E_{ρ₁⊗ρ₂}(V⊗W) = E_{ρ₁}(V) + E_{ρ₂}(W) on n×m product states.
pub fn split_additivity(n: usize, m: usize, kind: EntropyKind, trials: usize, seed: u64) -> Result<CheckReport> {
    let tol = Tolerances::default();
    let mut r = battery_rng(seed, 5);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (a, b) = (random_state(n, &mut r)?, random_state(m, &mut r)?);
        let (v, w) = (random_context(n, &mut r), random_context(m, &mut r));
        let joint = contextual_entropy(&a.tensor(&b), &split_context(&v, &w), kind, &tol)?;
        let parts = contextual_entropy(&a, &v, kind, &tol)? + contextual_entropy(&b, &w, kind, &tol)?;
        worst = worst.max((joint - parts).abs());
    }
    Ok(CheckReport::from_residual("split_additivity", worst, trials, IDENTITY_TOL))
}

/// Shannon subadditivity at split contexts for random (generally entangled) states:
/// E_ρ(V⊗W) ≤ E_{ρ₁}(V) + E_{ρ₂}(W).
pub fn split_subadditivity(n: usize, m: usize, trials: usize, seed: u64) -> Result<CheckReport> {
    let tol = Tolerances::default();
    let kind = EntropyKind::Shannon;
    let mut r = battery_rng(seed, 6);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let rho = random_state(n * m, &mut r)?;
        let (v, w) = (random_context(n, &mut r), random_context(m, &mut r));
        let joint = contextual_entropy(&rho, &split_context(&v, &w), kind, &tol)?;
        let a = rho.partial_trace(n, m, Keep::First)?;
        let b = rho.partial_trace(n, m, Keep::Second)?;
        let parts = contextual_entropy(&a, &v, kind, &tol)? + contextual_entropy(&b, &w, kind, &tol)?;
        worst = worst.max((joint - parts).max(0.0));
    }
    Ok(CheckReport::from_residual("split_subadditivity", worst, trials, INEQUALITY_SLACK))
}

/// S(p) ≥ S(coarse_grain(p)) on random vectors and partitions.
pub fn weak_recursivity(kind: EntropyKind, len: usize, trials: usize, seed: u64) -> Result<CheckReport> {
    let tol = Tolerances::default();
    let mut r = battery_rng(seed, 7);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let p = random_probability_vector(len, &mut r);
        let coarse = coarse_grain(&p, &random_partition(len, &mut r))?;
        let gap = entropy_unchecked(kind, &coarse, tol.prob) - entropy_unchecked(kind, &p, tol.prob);
        worst = worst.max(gap.max(0.0));
    }
    Ok(CheckReport::from_residual("weak_recursivity", worst, trials, tol.prob))
}

/// Orders probed by [`renyi_order_monotonicity`], increasing.
pub fn probe_orders() -> Vec<EntropyKind> {
    let mut kinds = alloc::vec![EntropyKind::Hartley];
    kinds.extend([0.25, 0.5, 1.0, 2.0, 3.0, 10.0].iter().map(|&q| EntropyKind::renyi(q).expect("valid order")));
    kinds.push(EntropyKind::Chebyshev);
    kinds
}

/// R_t(p) ≤ R_q(p) for t > q across [`probe_orders`].
pub fn renyi_order_monotonicity(len: usize, trials: usize, seed: u64) -> Result<CheckReport> {
    let tol = Tolerances::default();
    let kinds = probe_orders();
    let mut r = battery_rng(seed, 8);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let p = random_probability_vector(len, &mut r);
        let values: Vec<f64> = kinds.iter().map(|&k| entropy_unchecked(k, &p, tol.prob)).collect();
        for pair in values.windows(2) {
            worst = worst.max((pair[1] - pair[0]).max(0.0));
        }
    }
    Ok(CheckReport::from_residual("renyi_order_monotonicity", worst, trials, tol.prob))
}

/// A context at which an entangled state beats the product of its marginals.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub context: Context,
    /// E_ρ at the context.
    pub entangled: f64,
    /// E_{ρ₁⊗ρ₂} at the context.
    pub product: f64,
}

#[derive(Debug, Clone)]
pub struct CounterexampleSearch {
    /// `pass` means a violation was found; `max_residual` is the largest E_ρ − E_{ρ₁⊗ρ₂} seen.
    pub report: CheckReport,
    pub witness: Option<Counterexample>,
}

/// The Bell state (|00⟩ + |11⟩)/√2.
pub fn bell_state() -> DensityMatrix {
    let h = 0.5;
    let m = CMatrix::from_real_rows(&[
        &[h, 0.0, 0.0, h],
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0],
        &[h, 0.0, 0.0, h],
    ]);
    DensityMatrix::validate(m, &Tolerances::default()).expect("valid state")
}

/// Searches random contexts of every non-maximal rank profile (and maximal ones) of an n×m
/// composite for E_ρ(V) > E_{ρ₁⊗ρ₂}(V). Contexts are Haar-conjugated, so entangled contexts
/// dominate the sample.
pub fn entangled_counterexample(rho: &DensityMatrix, n: usize, m: usize, trials: usize, seed: u64) -> Result<CounterexampleSearch> {
    let tol = Tolerances::default();
    let kind = EntropyKind::Shannon;
    let product = rho.partial_trace(n, m, Keep::First)?.tensor(&rho.partial_trace(n, m, Keep::Second)?);
    let dim = n * m;
    let mut r = battery_rng(seed, 9);
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    for _ in 0..trials {
        let ctx = random_context(dim, &mut r);
        let e = contextual_entropy(rho, &ctx, kind, &tol)?;
        let p = contextual_entropy(&product, &ctx, kind, &tol)?;
        if e - p > best {
            best = e - p;
            if best > INEQUALITY_SLACK {
                witness = Some(Counterexample { context: ctx, entangled: e, product: p });
            }
        }
    }
    let report = CheckReport { check: "entangled_counterexample", max_residual: best, trials, pass: witness.is_some() };
    Ok(CounterexampleSearch { report, witness })
}

/// Scales probed by [`continuity`], decreasing.
pub const CONTINUITY_SCALES: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// |E(UVU†) − E(V)| against ‖U − I‖ for U = exp(sA) at shrinking s on full-rank states.
///
/// The Lipschitz constant C is fitted on the largest scale; the report's residual is the worst
/// ratio |ΔE| / (C‖U − I‖) at the smaller scales, which must stay below 2.
pub fn continuity(n: usize, kind: EntropyKind, trials: usize, seed: u64) -> Result<CheckReport> {
    let tol = Tolerances::default();
    let mut r = battery_rng(seed, 10);
    let mut ratios: Vec<[f64; CONTINUITY_SCALES.len()]> = Vec::with_capacity(trials);
    let all = alloc::vec![true; n];
    for _ in 0..trials {
        let rho = random_density(n, n, child_seed(&mut r))?;
        let ctx = random_context(n, &mut r);
        let base = contextual_entropy(&rho, &ctx, kind, &tol)?;
        let a = random_anti_hermitian(n, &all, &mut r);
        let a = a.scale_real(1.0 / a.max_abs());
        let mut row = [0.0; CONTINUITY_SCALES.len()];
        for (slot, &s) in row.iter_mut().zip(&CONTINUITY_SCALES) {
            let u = expm_anti_hermitian(&a.scale_real(s))?;
            let eps = (&u - &CMatrix::identity(n)).max_abs();
            let moved = contextual_entropy(&rho, &ctx.conjugated_by(&Unitary::new_unchecked(u)), kind, &tol)?;
            *slot = (moved - base).abs() / eps;
        }
        ratios.push(row);
    }
    let c = ratios.iter().map(|row| row[0]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let worst = ratios.iter().flat_map(|row| row[1..].iter().map(|x| x / c)).fold(0.0, f64::max);
    Ok(CheckReport::from_residual("continuity", worst, trials, 2.0))
}

/// Every battery at dimension n, with composite checks on 2×n; `trials` per battery.
pub fn full_battery(n: usize, trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let tol = Tolerances::default();
    let shannon = EntropyKind::Shannon;
    let mut r = battery_rng(seed, 11);
    let rho = random_state(n, &mut r)?;
    let composite = random_state(2 * n, &mut r)?;
    let mut out = alloc::vec![
        check_finite_additivity(&rho, trials, seed),
        check_context_independence(&rho, trials, seed, &tol)?,
        partial_trace_battery(&composite, 2, n, trials, seed, &tol)?,
        monotonicity(n, shannon, trials, seed)?,
        recursion(n, trials, seed)?,
        equivariance(n, shannon, trials, seed)?,
        concavity(n, shannon, trials, seed)?,
        split_additivity(2, n, shannon, trials, seed)?,
        split_subadditivity(2, n, trials, seed)?,
        weak_recursivity(shannon, n, trials, seed)?,
        renyi_order_monotonicity(n, trials, seed)?,
        continuity(n, shannon, trials, seed)?,
    ];
    out.push(entangled_counterexample(&bell_state(), 2, 2, trials.max(64), seed)?.report);
    Ok(out)
}

/// Contexts with a fixed rank profile, for targeted searches.
pub fn contexts_with_ranks(ranks: &[usize], count: usize, seed: u64) -> Vec<Context> {
    let mut r = battery_rng(seed, 12);
    (0..count).map(|_| random_context_with_ranks(ranks, &mut r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batteries_pass_at_small_scale() {
        for report in full_battery(3, 40, 1).unwrap() {
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn bell_state_marginals_are_maximally_mixed() {
        let bell = bell_state();
        let a = bell.partial_trace(2, 2, Keep::First).unwrap();
        assert!(a.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    }

    #[test]
    fn bell_violation_needs_a_non_maximal_context() {
        // At maximal contexts the product of the marginals reads ln 4, the largest possible value.
        let bell = bell_state();
        let prod = DensityMatrix::maximally_mixed(4);
        let tol = Tolerances::default();
        for ctx in contexts_with_ranks(&[1, 1, 1, 1], 20, 0) {
            let e = contextual_entropy(&bell, &ctx, EntropyKind::Shannon, &tol).unwrap();
            let p = contextual_entropy(&prod, &ctx, EntropyKind::Shannon, &tol).unwrap();
            assert!(e <= p + 1e-12);
        }
        let found = entangled_counterexample(&bell, 2, 2, 200, 3).unwrap();
        let w = found.witness.expect("violation");
        assert!(w.context.len() < 4 && w.entangled > w.product);
    }

    #[test]
    fn concavity_rejects_large_orders() {
        assert!(concavity(3, EntropyKind::renyi(2.0).unwrap(), 1, 0).is_err());
    }
}
