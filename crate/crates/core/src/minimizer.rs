//! Minimisation of an entropy oracle over maximal contexts.
//!
//! A maximal context is the set of columns of a unitary U, up to column phases and order, so an
//! oracle restricted to maximal contexts is a function on U(n). Because Schur-concave entropies
//! are minimised exactly at the eigenbasis of the state, the minimum is the quantum entropy of the
//! state behind the oracle.
//!
//! The search is derivative-free (the oracle may be a black box). Each sweep visits every Givens
//! plane (i, j) of the current frame with a real and an imaginary generator, plus one random
//! anti-Hermitian direction, trying U·exp(∓ηA) and the vertex of the parabola through the three
//! samples; any decrease is accepted. A sweep that gains less than `value_tol` shrinks η. A
//! restart converges when η falls below `min_step`.

use alloc::vec;
use alloc::vec::Vec;

use crate::context::MaximalContext;
use crate::entropy::EntropyKind;
use crate::linalg::{eig_hermitian, orthonormalize};
use crate::matrix::CMatrix;
use crate::oracle::{EntropyOracle, StateOracle};
use crate::random::{haar_unitary_from, random_anti_hermitian, rng, stream, Rng64};
use crate::state::{DensityMatrix, Unitary};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerConfig {
    pub restarts: usize,
    /// Sweep cap per restart.
    pub max_iters: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub value_tol: f64,
    pub min_step: f64,
    pub seed: u64,
}

impl MinimizerConfig {
    /// Defaults for dimension `n`: 8·n restarts.
    pub fn for_dim(n: usize) -> Self {
        Self {
            restarts: 8 * n.max(1),
            max_iters: 500,
            initial_step: 0.5,
            shrink: 0.5,
            value_tol: 1e-15,
            min_step: 1e-9,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidConfig("restarts and max_iters must be positive"));
        }
        if !(self.initial_step > 0.0 && self.min_step > 0.0 && self.value_tol >= 0.0) {
            return Err(Error::InvalidConfig("steps must be positive"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidConfig("shrink factor must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MinimizerResult {
    pub best_context: MaximalContext,
    pub best_value: f64,
    /// Value after each sweep of the winning restart.
    pub value_trace: Vec<f64>,
    pub queries_used: usize,
    /// Whether the winning restart met the step criterion (rather than the sweep cap).
    pub converged: bool,
    pub best_restart: usize,
    /// Final value of every completed restart, in restart order.
    pub restart_values: Vec<f64>,
    pub converged_restarts: usize,
}

struct RestartOutcome {
    unitary: CMatrix,
    value: f64,
    trace: Vec<f64>,
    converged: bool,
}

struct Search<'a, O: ?Sized> {
    oracle: &'a O,
    queries: usize,
}

impl<O: EntropyOracle + ?Sized> Search<'_, O> {
    fn eval(&mut self, u: &CMatrix) -> Result<f64> {
        self.queries += 1;
        let ctx = MaximalContext::from_unitary(&Unitary::new_unchecked(u.clone()))?;
        self.oracle.query(ctx.context())
    }
}

/// Applies the Givens rotation of columns (i, j) by angle t; `imag` selects the generator
/// i(E_ij + E_ji) instead of E_ij − E_ji.
fn givens(u: &CMatrix, i: usize, j: usize, t: f64, imag: bool) -> CMatrix {
    let (c, s) = (libm::cos(t), libm::sin(t));
    let mut out = u.clone();
    let (a, b) = if imag { (C64::new(0.0, s), C64::new(0.0, s)) } else { (C64::new(s, 0.0), C64::new(-s, 0.0)) };
    for r in 0..u.rows() {
        let (x, y) = (u[(r, i)], u[(r, j)]);
        out[(r, i)] = x * c + y * a;
        out[(r, j)] = x * b + y * c;
    }
    out
}

/// Samples f at ±η along a direction and at the parabola vertex; returns the best point if it
/// improves on `f0`.
fn line_probe<F>(f0: f64, eta: f64, mut at: F) -> Result<Option<(f64, CMatrix)>>
where
    F: FnMut(f64) -> Result<(f64, CMatrix)>,
{
    let plus = at(eta)?;
    let minus = at(-eta)?;
    let mut best: Option<(f64, CMatrix)> = None;
    let mut consider = |cand: (f64, CMatrix)| {
        if cand.0 < f0 && best.as_ref().is_none_or(|b| cand.0 < b.0) {
            best = Some(cand);
        }
    };
    let curvature = (plus.0 + minus.0 - 2.0 * f0) / (2.0 * eta * eta);
    let slope = (plus.0 - minus.0) / (2.0 * eta);
    consider(plus);
    consider(minus);
    if curvature > 0.0 {
        let t = -slope / (2.0 * curvature);
        if t.is_finite() && t.abs() <= 2.0 * eta && (t.abs() - eta).abs() > 1e-3 * eta {
            consider(at(t)?);
        }
    }
    Ok(best)
}

fn run_restart<O: EntropyOracle + ?Sized>(
    search: &mut Search<'_, O>,
    n: usize,
    cfg: &MinimizerConfig,
    r: &mut Rng64,
) -> Result<RestartOutcome> {
    let mut u = haar_unitary_from(n, r).into_matrix();
    let mut f = search.eval(&u)?;
    let mut eta = cfg.initial_step;
    let mut trace = vec![f];
    let mut converged = false;
    let all = vec![true; n];

    for _ in 0..cfg.max_iters {
        let start = f;
        for i in 0..n {
            for j in (i + 1)..n {
                for imag in [false, true] {
                    let probe = line_probe(f, eta, |t| {
                        let cand = givens(&u, i, j, t, imag);
                        Ok((search.eval(&cand)?, cand))
                    })?;
                    if let Some((val, cand)) = probe {
                        f = val;
                        u = cand;
                    }
                }
            }
        }
        // Random direction: U·exp(−tA) with A normalised to unit max-modulus.
        let a = random_anti_hermitian(n, &all, r);
        let a = a.scale_real(1.0 / a.max_abs().max(f64::MIN_POSITIVE));
        let eig = eig_hermitian(&a.scale(C64::new(0.0, -1.0)), 1e-8)?;
        let probe = line_probe(f, eta, |t| {
            let mut d = CMatrix::zeros(n, n);
            for (k, &l) in eig.values.iter().enumerate() {
                d[(k, k)] = C64::new(libm::cos(-t * l), libm::sin(-t * l));
            }
            let cand = u.matmul(&eig.vectors.conjugate(&d));
            Ok((search.eval(&cand)?, cand))
        })?;
        if let Some((val, cand)) = probe {
            f = val;
            u = cand;
        }
        u = orthonormalize(&u)?;
        trace.push(f);

        if start - f <= cfg.value_tol {
            if eta <= cfg.min_step {
                converged = true;
                break;
            }
            eta *= cfg.shrink;
        }
    }
    Ok(RestartOutcome { unitary: u, value: f, trace, converged })
}

/// Multi-start derivative-free descent of `oracle` over the maximal contexts of dimension `n`.
///
/// Restart r draws its generator from substream `(seed, MINIMIZER·2^32 + r)`; the best restart
/// wins, ties going to the lowest index.
pub fn minimize_over_maximal_contexts<O: EntropyOracle + ?Sized>(
    oracle: &O,
    n: usize,
    cfg: &MinimizerConfig,
) -> Result<MinimizerResult> {
    cfg.validate()?;
    if oracle.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: oracle.dim() });
    }
    if n < 2 {
        return Err(Error::TrivialContext);
    }
    let mut search = Search { oracle, queries: 0 };
    let mut best: Option<(usize, RestartOutcome)> = None;
    let mut restart_values = Vec::with_capacity(cfg.restarts);
    let mut converged_restarts = 0;
    for restart in 0..cfg.restarts {
        let mut r = rng(cfg.seed, (stream::MINIMIZER << 32) + restart as u64);
        let outcome = match run_restart(&mut search, n, cfg, &mut r) {
            Ok(o) => o,
            Err(e @ Error::BudgetExhausted { .. }) => {
                if best.is_none() {
                    return Err(e);
                }
                break;
            }
            Err(e) => return Err(e),
        };
        restart_values.push(outcome.value);
        converged_restarts += usize::from(outcome.converged);
        if best.as_ref().is_none_or(|(_, b)| outcome.value < b.value) {
            best = Some((restart, outcome));
        }
    }
    let (best_restart, outcome) = best.expect("at least one restart");
    let best_context = MaximalContext::from_unitary(&Unitary::new_unchecked(outcome.unitary))?;
    Ok(MinimizerResult {
        best_context,
        best_value: outcome.value,
        value_trace: outcome.trace,
        queries_used: search.queries,
        converged: outcome.converged,
        best_restart,
        restart_values,
        converged_restarts,
    })
}

/// Quantum Shannon/Rényi entropy of ρ, read off as the minimum of its contextual entropy over
/// maximal contexts.
pub fn extract_quantum_entropy(rho: &DensityMatrix, kind: EntropyKind, cfg: &MinimizerConfig) -> Result<MinimizerResult> {
    if matches!(kind, EntropyKind::Hartley) {
        // piecewise constant: no descent direction exists
        return Err(Error::UnsupportedKind { kind: "hartley" });
    }
    let oracle = StateOracle::new(rho.clone(), kind);
    minimize_over_maximal_contexts(&oracle, rho.dim(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Budgeted;
    use crate::random::random_density;

    fn quick(n: usize) -> MinimizerConfig {
        MinimizerConfig { restarts: 3, ..MinimizerConfig::for_dim(n) }
    }

    #[test]
    fn givens_rotations_stay_unitary() {
        let u = haar_unitary_from(4, &mut rng(1, 0)).into_matrix();
        for imag in [false, true] {
            let g = givens(&u, 1, 3, 0.7, imag);
            assert!(g.matmul(&g.adjoint()).max_abs_diff(&CMatrix::identity(4)) < 1e-14);
        }
    }

    #[test]
    fn pure_state_minimum_is_zero() {
        let rho = random_density(3, 1, 4).unwrap();
        let res = extract_quantum_entropy(&rho, EntropyKind::Shannon, &quick(3)).unwrap();
        assert!(res.best_value <= 1e-6, "{}", res.best_value);
    }

    #[test]
    fn maximally_mixed_is_flat() {
        let rho = DensityMatrix::maximally_mixed(3);
        let res = extract_quantum_entropy(&rho, EntropyKind::Shannon, &quick(3)).unwrap();
        assert!((res.best_value - libm::log(3.0)).abs() < 1e-12);
    }

    #[test]
    fn matches_eigen_entropy() {
        for seed in 0..3 {
            let rho = random_density(4, 4, seed).unwrap();
            let res = extract_quantum_entropy(&rho, EntropyKind::Shannon, &quick(4)).unwrap();
            let vn = rho.von_neumann_entropy().unwrap();
            assert!((res.best_value - vn).abs() < 1e-6, "{} vs {vn}", res.best_value);
        }
    }

    #[test]
    fn trace_is_monotone_and_run_is_deterministic() {
        let rho = random_density(3, 2, 9).unwrap();
        let cfg = quick(3);
        let a = extract_quantum_entropy(&rho, EntropyKind::Shannon, &cfg).unwrap();
        assert!(a.value_trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*a.value_trace.last().unwrap(), a.best_value);
        let b = extract_quantum_entropy(&rho, EntropyKind::Shannon, &cfg).unwrap();
        assert_eq!(a.best_value, b.best_value);
        assert_eq!(a.best_context, b.best_context);
        assert_eq!(a.queries_used, b.queries_used);
    }

    #[test]
    fn budget_before_first_restart_is_an_error() {
        let rho = random_density(3, 3, 0).unwrap();
        let oracle = Budgeted::new(StateOracle::new(rho, EntropyKind::Shannon), Some(10));
        let err = minimize_over_maximal_contexts(&oracle, 3, &quick(3)).unwrap_err();
        assert_eq!(err, Error::BudgetExhausted { budget: 10 });
    }

    #[test]
    fn config_validation() {
        let mut cfg = MinimizerConfig::for_dim(3);
        cfg.shrink = 1.0;
        assert!(cfg.validate().is_err());
        assert!(extract_quantum_entropy(&DensityMatrix::maximally_mixed(2), EntropyKind::Hartley, &quick(2)).is_err());
    }
}
