//! Reconstruction of a density matrix from its contextual-entropy section.
//!
//! The minimum of the section over maximal contexts sits at an eigenbasis V = {P_i} of the
//! state. The two-outcome contexts W_i = {P_i, I − P_i} then read Sh(λ_i, 1 − λ_i), which pins
//! λ_i up to the reflection λ ↦ 1 − λ. At most one eigenvalue exceeds 1/2, and the sum S of the
//! inverted values p_i ≤ 1/2 tells which (if any) has to be reflected:
//!
//! - S = 1: no eigenvalue exceeds 1/2 and λ_i = p_i.
//! - S < 1: the reflected index j has p_j = S/2. One match is unique. Two matches are only
//!   possible for rank-two states, and are separated by re-running the analysis in a basis
//!   rotated about P_{j₁}.
//! - S > 1: no state produces the section.
//!
//! In dimension two every section comes from exactly two states, ρ and I − ρ.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::context::{partition_from_ranks, Context, MaximalContext};
use crate::entropy::{contextual_entropy, entropy_unchecked, invert_two_outcome, EntropyKind};
use crate::linalg::expm_anti_hermitian;
use crate::matrix::CMatrix;
use crate::measure::CheckReport;
use crate::minimizer::{minimize_over_maximal_contexts, MinimizerConfig};
use crate::oracle::{Budgeted, EntropyOracle};
use crate::random::{haar_unitary_from, random_anti_hermitian, rng, stream, Rng64};
use crate::state::{DensityMatrix, Projection, Unitary};
use crate::{Error, Result, Tolerances};

/// Cap on regenerated rotations in the pure-state pass and the tie-break.
const ROTATION_RETRIES: usize = 16;

/// Probability below which an outcome is indistinguishable from rounding noise.
const NOISE_PROBABILITY: f64 = 1e-14;

/// Factor by which a rotation about the state's axis may raise the residual value at V0.
const ZERO_SPREAD: f64 = 16.0;

/// A rotated axis may keep at most this much weight on any original axis.
const MAX_OVERLAP: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionConfig {
    pub minimizer: MinimizerConfig,
    pub kind: EntropyKind,
    /// Threshold for reading an entropy or probability as zero.
    pub tol_zero: f64,
    /// Tolerance of the S = 1 decision.
    pub tol_sum: f64,
    /// Tolerance of the p_j = S/2 decision.
    pub tie_tol: f64,
    pub verify_contexts: usize,
    pub verify_tol: f64,
    pub seed: u64,
    pub tol: Tolerances,
}

impl ReconstructionConfig {
    pub fn for_dim(n: usize) -> Self {
        Self {
            minimizer: MinimizerConfig::for_dim(n),
            kind: EntropyKind::Shannon,
            tol_zero: 1e-8,
            tol_sum: 1e-7,
            tie_tol: 1e-7,
            verify_contexts: 64,
            verify_tol: 1e-6,
            seed: 0,
            tol: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.minimizer.validate()?;
        let tols = [self.tol_zero, self.tol_sum, self.tie_tol, self.verify_tol];
        if tols.iter().any(|t| t.is_nan() || *t <= 0.0) {
            return Err(Error::InvalidConfig("reconstruction tolerances must be positive"));
        }
        if !self.kind.supports_inversion() {
            return Err(Error::UnsupportedKind { kind: self.kind.name() });
        }
        Ok(())
    }
}

/// Which part of the algorithm produced the candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Pure,
    Dim2,
    SumOne,
    SingleMatch,
    TieBreak,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Pure => "pure",
            Branch::Dim2 => "dim2",
            Branch::SumOne => "sum_one",
            Branch::SingleMatch => "single_match",
            Branch::TieBreak => "tie_break",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InfeasibleReason {
    /// γ at the two-outcome context W_index exceeds ln 2.
    TwoOutcomeAboveLn2 { index: usize, value: f64 },
    SumExceedsOne { sum: f64 },
    /// S < 1 but no p_j equals S/2.
    NoTieMatch { sum: f64 },
    /// Three or more matches, or two matches next to further nonzero p_i.
    AmbiguousTie { matches: Vec<usize> },
    /// Every rotated pass ended in another tie.
    TieBreakFailed,
    /// Rotations about the zero-entropy context found no zero (or several).
    PureReconstructionFailed,
    /// The candidate disagrees with the section at a sampled context.
    VerificationFailed { max_residual: f64, tol: f64 },
}

impl InfeasibleReason {
    pub fn name(&self) -> &'static str {
        match self {
            InfeasibleReason::TwoOutcomeAboveLn2 { .. } => "two_outcome_above_ln2",
            InfeasibleReason::SumExceedsOne { .. } => "sum_exceeds_one",
            InfeasibleReason::NoTieMatch { .. } => "no_tie_match",
            InfeasibleReason::AmbiguousTie { .. } => "ambiguous_tie",
            InfeasibleReason::TieBreakFailed => "tie_break_failed",
            InfeasibleReason::PureReconstructionFailed => "pure_reconstruction_failed",
            InfeasibleReason::VerificationFailed { .. } => "verification_failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Unique(DensityMatrix),
    AmbiguousPair(DensityMatrix, DensityMatrix),
    Infeasible(InfeasibleReason),
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub outcome: Outcome,
    /// Branch that produced the candidate; `None` when infeasibility was detected before one.
    pub branch: Option<Branch>,
    /// Minimum of the section over maximal contexts, with its context.
    pub minimum: f64,
    pub minimizing_context: MaximalContext,
    pub minimizer_converged: bool,
    /// Inverted two-outcome values p_i ≤ 1/2 (empty on the pure and dim-2 paths).
    pub p: Vec<f64>,
    pub sum: Option<f64>,
    pub queries: usize,
    /// Verification of the candidate, or of the worse pair member.
    pub verification: Option<CheckReport>,
}

enum Analysis {
    Diagonal(Vec<f64>, Branch),
    Tie(usize, usize),
    Infeasible(InfeasibleReason),
}

/// The S-case analysis on inverted values p_i.
fn analyse(p: &[f64], cfg: &ReconstructionConfig) -> Analysis {
    let sum: f64 = p.iter().sum();
    if sum > 1.0 + cfg.tol_sum {
        return Analysis::Infeasible(InfeasibleReason::SumExceedsOne { sum });
    }
    if (sum - 1.0).abs() <= cfg.tol_sum {
        return Analysis::Diagonal(p.to_vec(), Branch::SumOne);
    }
    let half = sum / 2.0;
    let matches: Vec<usize> = (0..p.len()).filter(|&j| (p[j] - half).abs() <= cfg.tie_tol).collect();
    match matches[..] {
        [] => Analysis::Infeasible(InfeasibleReason::NoTieMatch { sum }),
        [j] => {
            let mut d = p.to_vec();
            d[j] = 1.0 - p[j];
            Analysis::Diagonal(d, Branch::SingleMatch)
        }
        [j1, j2] if (0..p.len()).all(|i| i == j1 || i == j2 || p[i] <= cfg.tol_zero) => Analysis::Tie(j1, j2),
        _ => Analysis::Infeasible(InfeasibleReason::AmbiguousTie { matches }),
    }
}

/// Largest value read as zero: `tol_zero`, or the entropy of a pure distribution carrying
/// rounding noise on its other n − 1 outcomes, whichever is larger. The second term only matters
/// for Rényi q < 1, whose entropy rises like δ^q off a pure distribution.
fn zero_threshold(cfg: &ReconstructionConfig, n: usize) -> f64 {
    let mut p = vec![NOISE_PROBABILITY; n];
    p[0] = 1.0 - (n - 1) as f64 * NOISE_PROBABILITY;
    cfg.tol_zero.max(entropy_unchecked(cfg.kind, &p, 0.0))
}

/// Queries γ at {|u_k⟩⟨u_k|, I − |u_k⟩⟨u_k|} for every column of `u` and inverts each value.
fn invert_columns<O: EntropyOracle + ?Sized>(
    oracle: &O,
    u: &CMatrix,
    cfg: &ReconstructionConfig,
) -> Result<core::result::Result<Vec<f64>, InfeasibleReason>> {
    let top = core::f64::consts::LN_2 + cfg.tol.inv;
    let mut p = Vec::with_capacity(u.cols());
    for k in 0..u.cols() {
        let w = Context::two_outcome(&Projection::onto(&u.column(k))?)?;
        let value = oracle.query(&w)?;
        if value > top {
            return Ok(Err(InfeasibleReason::TwoOutcomeAboveLn2 { index: k, value }));
        }
        p.push(invert_two_outcome(cfg.kind, value.max(0.0), &cfg.tol)?.0);
    }
    Ok(Ok(p))
}

/// Σ λ_k |u_k⟩⟨u_k|, renormalised to unit trace.
fn assemble(u: &CMatrix, lambda: &[f64], tol: &Tolerances) -> Result<DensityMatrix> {
    let total: f64 = lambda.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::NumericalBreakdown { value: total });
    }
    let d = CMatrix::from_real_diagonal(&lambda.iter().map(|l| l.max(0.0) / total).collect::<Vec<_>>());
    DensityMatrix::validate(u.conjugate(&d).hermitize(), tol)
}

/// U·exp(A) with A supported off `axis`, redrawn until no other axis stays near any original
/// axis. `None` when no admissible rotation exists (dimension 2) or the retries run out.
fn rotation_about(u: &CMatrix, axis: usize, r: &mut Rng64) -> Result<Option<CMatrix>> {
    let n = u.rows();
    if n < 3 {
        return Ok(None);
    }
    let mut mask = vec![true; n];
    mask[axis] = false;
    for _ in 0..ROTATION_RETRIES {
        let g = expm_anti_hermitian(&random_anti_hermitian(n, &mask, r))?;
        let admissible = (0..n)
            .filter(|&k| k != axis)
            .all(|k| (0..n).all(|m| g[(m, k)].norm_sqr() <= MAX_OVERLAP));
        if admissible {
            return Ok(Some(u.matmul(&g)));
        }
    }
    Ok(None)
}

/// Recovers a pure state from a maximal context at which the section vanishes.
///
/// For each axis i the context is rotated about P_i without mapping any other axis onto an axis;
/// exactly the rotation about the state's own axis keeps the value at zero.
pub fn reconstruct_pure<O: EntropyOracle + ?Sized>(
    oracle: &O,
    v0: &MaximalContext,
    cfg: &ReconstructionConfig,
) -> Result<DensityMatrix> {
    let u = v0.unitary().matrix();
    let n = u.rows();
    if oracle.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: oracle.dim() });
    }
    let base = oracle.query(v0.context())?;
    let floor = zero_threshold(cfg, n);
    if base > floor {
        return Err(Error::NoZeroContext);
    }
    // Rotating about the right axis only redistributes the residual weight of V0 over the other
    // axes, which can raise a sub-linear entropy (Rényi q < 1) above its value at V0.
    let zero = floor.max(ZERO_SPREAD * base);
    let mut r = rng(cfg.seed, stream::ROTATION);
    let mut last = Error::NoZeroContext;
    for _ in 0..ROTATION_RETRIES {
        let mut zeros = Vec::new();
        for i in 0..n {
            let Some(rotated) = rotation_about(u, i, &mut r)? else {
                return Err(Error::NoZeroContext);
            };
            let ctx = MaximalContext::from_unitary(&Unitary::new_unchecked(rotated))?;
            if oracle.query(ctx.context())? <= zero {
                zeros.push(i);
            }
        }
        match zeros[..] {
            [] => return Err(Error::NoZeroContext),
            [i] => {
                let mut lambda = vec![0.0; n];
                lambda[i] = 1.0;
                return assemble(u, &lambda, &cfg.tol);
            }
            _ => last = Error::MultipleZeroContexts { count: zeros.len() },
        }
    }
    Err(last)
}

/// Enumerates the compositions of `n` into at least two parts.
fn rank_profiles(n: usize) -> Vec<Vec<usize>> {
    let cuts = n - 1;
    (1u64..(1 << cuts))
        .map(|mask| {
            let mut ranks = Vec::new();
            let mut run = 1;
            for c in 0..cuts {
                if mask & (1 << c) != 0 {
                    ranks.push(run);
                    run = 1;
                } else {
                    run += 1;
                }
            }
            ranks.push(run);
            ranks
        })
        .collect()
}

/// Largest disagreement between the candidate's contextual entropy and the oracle over
/// `contexts` random contexts, cycling through every rank profile of the dimension.
pub fn verify_candidate<O: EntropyOracle + ?Sized>(
    rho: &DensityMatrix,
    oracle: &O,
    kind: EntropyKind,
    contexts: usize,
    tol: f64,
    seed: u64,
) -> Result<CheckReport> {
    let n = rho.dim();
    if oracle.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: oracle.dim() });
    }
    let profiles = rank_profiles(n);
    let mut r = rng(seed, stream::VERIFY);
    let mut worst: f64 = 0.0;
    for t in 0..contexts {
        let u = haar_unitary_from(n, &mut r);
        let ctx = Context::from_unitary_partition(&u, &partition_from_ranks(&profiles[t % profiles.len()]))?;
        let own = contextual_entropy(rho, &ctx, kind, &Tolerances::default())?;
        worst = worst.max((own - oracle.query(&ctx)?).abs());
    }
    Ok(CheckReport::from_residual("verify_candidate", worst, contexts, tol))
}

struct Run<'a> {
    cfg: &'a ReconstructionConfig,
    minimum: f64,
    context: MaximalContext,
    converged: bool,
}

impl Run<'_> {
    fn finish(self, outcome: Outcome, branch: Option<Branch>, p: Vec<f64>, queries: usize, verification: Option<CheckReport>) -> ReconstructionResult {
        let sum = (!p.is_empty()).then(|| p.iter().sum());
        ReconstructionResult {
            outcome,
            branch,
            minimum: self.minimum,
            minimizing_context: self.context,
            minimizer_converged: self.converged,
            p,
            sum,
            queries,
            verification,
        }
    }
}

fn verified<O: EntropyOracle + ?Sized>(oracle: &O, rho: &DensityMatrix, cfg: &ReconstructionConfig) -> Result<CheckReport> {
    verify_candidate(rho, oracle, cfg.kind, cfg.verify_contexts, cfg.verify_tol, cfg.seed)
}

fn unique_or_fail(rho: DensityMatrix, report: &CheckReport, tol: f64) -> Outcome {
    if report.pass {
        Outcome::Unique(rho)
    } else {
        Outcome::Infeasible(InfeasibleReason::VerificationFailed { max_residual: report.max_residual, tol })
    }
}

/// Reconstructs the state behind a contextual-entropy section on an n-dimensional system.
///
/// Oracle failures (including an exhausted budget) are returned as errors; a section that no
/// state, or no unique state, produces is reported as [`Outcome::Infeasible`].
pub fn reconstruct<O: EntropyOracle + ?Sized>(oracle: &O, n: usize, cfg: &ReconstructionConfig) -> Result<ReconstructionResult> {
    cfg.validate()?;
    if oracle.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: oracle.dim() });
    }
    if n < 2 {
        return Err(Error::TrivialContext);
    }
    let counted = Budgeted::new(oracle, None);
    let min = minimize_over_maximal_contexts(&counted, n, &cfg.minimizer)?;
    let run = Run { cfg, minimum: min.best_value, context: min.best_context, converged: min.converged };
    let u = run.context.unitary().matrix().clone();

    if n == 2 {
        return reconstruct_dim2_from(&counted, run);
    }

    if run.minimum <= zero_threshold(cfg, n) {
        return match reconstruct_pure(&counted, &run.context, cfg) {
            Ok(rho) => {
                let report = verified(&counted, &rho, cfg)?;
                let outcome = unique_or_fail(rho, &report, cfg.verify_tol);
                Ok(run.finish(outcome, Some(Branch::Pure), Vec::new(), counted.used(), Some(report)))
            }
            Err(Error::NoZeroContext | Error::MultipleZeroContexts { .. }) => {
                let outcome = Outcome::Infeasible(InfeasibleReason::PureReconstructionFailed);
                Ok(run.finish(outcome, Some(Branch::Pure), Vec::new(), counted.used(), None))
            }
            Err(e) => Err(e),
        };
    }

    let p = match invert_columns(&counted, &u, cfg)? {
        Ok(p) => p,
        Err(reason) => return Ok(run.finish(Outcome::Infeasible(reason), None, Vec::new(), counted.used(), None)),
    };

    let (lambda, branch) = match analyse(&p, cfg) {
        Analysis::Infeasible(reason) => {
            return Ok(run.finish(Outcome::Infeasible(reason), None, p, counted.used(), None));
        }
        Analysis::Diagonal(d, branch) => (d, branch),
        Analysis::Tie(j1, j2) => match tie_break(&counted, &u, j1, cfg)? {
            Some(a) => {
                // ρ₁ has weight p_{j1} on P_{j1}; ρ₂ has 1 − p_{j1}.
                let mut d = p.clone();
                if (a - p[j1]).abs() <= (a - (1.0 - p[j1])).abs() {
                    d[j2] = 1.0 - p[j2];
                } else {
                    d[j1] = 1.0 - p[j1];
                }
                (d, Branch::TieBreak)
            }
            None => {
                let outcome = Outcome::Infeasible(InfeasibleReason::TieBreakFailed);
                return Ok(run.finish(outcome, Some(Branch::TieBreak), p, counted.used(), None));
            }
        },
    };

    let rho = assemble(&u, &lambda, &cfg.tol)?;
    let report = verified(&counted, &rho, cfg)?;
    let outcome = unique_or_fail(rho, &report, cfg.verify_tol);
    Ok(run.finish(outcome, Some(branch), p, counted.used(), Some(report)))
}

/// Reads the j₁-th diagonal entry of U⁻¹ρU for a rotation U about P_{j₁}, by running the
/// p-extraction and case analysis in the rotated frame. `None` if every rotation ties again.
fn tie_break<O: EntropyOracle + ?Sized>(oracle: &O, u: &CMatrix, j1: usize, cfg: &ReconstructionConfig) -> Result<Option<f64>> {
    let mut r = rng(cfg.seed, stream::ROTATION ^ 0x7469_6500);
    for _ in 0..ROTATION_RETRIES {
        let Some(rotated) = rotation_about(u, j1, &mut r)? else {
            return Ok(None);
        };
        let Ok(q) = invert_columns(oracle, &rotated, cfg)? else {
            continue;
        };
        if let Analysis::Diagonal(d, _) = analyse(&q, cfg) {
            return Ok(Some(d[j1]));
        }
    }
    Ok(None)
}

/// Dimension two: the section determines the eigenbasis and the unordered spectrum only.
pub fn reconstruct_dim2<O: EntropyOracle + ?Sized>(oracle: &O, cfg: &ReconstructionConfig) -> Result<ReconstructionResult> {
    cfg.validate()?;
    if oracle.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: oracle.dim() });
    }
    let counted = Budgeted::new(oracle, None);
    let min = minimize_over_maximal_contexts(&counted, 2, &cfg.minimizer)?;
    let run = Run { cfg, minimum: min.best_value, context: min.best_context, converged: min.converged };
    reconstruct_dim2_from(&counted, run)
}

fn reconstruct_dim2_from<O: EntropyOracle>(counted: &Budgeted<O>, run: Run<'_>) -> Result<ReconstructionResult> {
    let cfg = run.cfg;
    let u = run.context.unitary().matrix().clone();
    let (low, high) = invert_two_outcome(cfg.kind, run.minimum.max(0.0), &cfg.tol)?;
    if (low - 0.5).abs() <= cfg.tie_tol {
        let rho = DensityMatrix::maximally_mixed(2);
        let report = verified(counted, &rho, cfg)?;
        let outcome = unique_or_fail(rho, &report, cfg.verify_tol);
        return Ok(run.finish(outcome, Some(Branch::Dim2), Vec::new(), counted.used(), Some(report)));
    }
    let a = assemble(&u, &[low, high], &cfg.tol)?;
    let b = assemble(&u, &[high, low], &cfg.tol)?;
    let ra = verified(counted, &a, cfg)?;
    let rb = verified(counted, &b, cfg)?;
    let worse = if ra.max_residual >= rb.max_residual { ra } else { rb };
    let outcome = if worse.pass {
        Outcome::AmbiguousPair(a, b)
    } else {
        Outcome::Infeasible(InfeasibleReason::VerificationFailed { max_residual: worse.max_residual, tol: cfg.verify_tol })
    };
    Ok(run.finish(outcome, Some(Branch::Dim2), Vec::new(), counted.used(), Some(worse)))
}

/// A random rotation of `u` about column `axis`, for building tie cases in tests and batteries.
pub fn random_rotation_about<R: Rng + ?Sized>(n: usize, axis: usize, r: &mut R) -> Result<Unitary> {
    let mut mask = vec![true; n];
    mask[axis] = false;
    Ok(Unitary::new_unchecked(expm_anti_hermitian(&random_anti_hermitian(n, &mask, r))?))
}
