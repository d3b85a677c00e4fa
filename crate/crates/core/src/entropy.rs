//! Shannon and Rényi entropies of probability vectors and their contextual lifts.
//!
//! Natural logarithms throughout; 0·ln 0 = 0 and 0^q = 0.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::context::{refines, validate_partition, Context};
use crate::measure::probabilities;
use crate::state::DensityMatrix;
use crate::{Error, Result, Tolerances};

/// Rényi parameters this close to 1 are evaluated as Shannon entropy.
const SHANNON_WINDOW: f64 = 1e-6;
/// Iterations of two-outcome bisection.
const BISECTION_STEPS: usize = 80;

/// Member of the Rényi family. `Renyi(q)` is normalised by [`EntropyKind::renyi`] so that q = 0,
/// q → 1 and q = ∞ map onto the dedicated variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyKind {
    Shannon,
    Renyi(f64),
    /// R₀ = ln #(nonzero entries).
    Hartley,
    /// R_∞ = −ln max p.
    Chebyshev,
}

impl EntropyKind {
    pub fn renyi(q: f64) -> Result<Self> {
        if q.is_nan() || q < 0.0 {
            return Err(Error::BadRenyiParameter { q });
        }
        Ok(if q == 0.0 {
            Self::Hartley
        } else if q.is_infinite() {
            Self::Chebyshev
        } else if (q - 1.0).abs() < SHANNON_WINDOW {
            Self::Shannon
        } else {
            Self::Renyi(q)
        })
    }

    /// The Rényi order: 1 for Shannon, 0 for Hartley, ∞ for Chebyshev.
    pub fn order(&self) -> f64 {
        match *self {
            Self::Shannon => 1.0,
            Self::Renyi(q) => q,
            Self::Hartley => 0.0,
            Self::Chebyshev => f64::INFINITY,
        }
    }

    /// Whether the two-outcome entropy is invertible on [0, ½] (everything except Hartley).
    pub fn supports_inversion(&self) -> bool {
        !matches!(self, Self::Hartley)
    }

    pub(crate) fn name(&self) -> &'static str {
        match self {
            Self::Shannon => "shannon",
            Self::Renyi(_) => "renyi",
            Self::Hartley => "hartley",
            Self::Chebyshev => "chebyshev",
        }
    }
}

impl fmt::Display for EntropyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Renyi(q) => write!(f, "renyi:{q}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for EntropyKind {
    type Err = Error;

    /// `shannon`, `hartley`, `chebyshev`, or `renyi:<q>` (q may be `inf`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "shannon" => Ok(Self::Shannon),
            "hartley" => Ok(Self::Hartley),
            "chebyshev" => Ok(Self::Chebyshev),
            other => {
                let q = other
                    .strip_prefix("renyi:")
                    .ok_or(Error::InvalidConfig("entropy kind must be shannon, hartley, chebyshev or renyi:<q>"))?;
                let q: f64 = q.parse().map_err(|_| Error::InvalidConfig("unparsable Renyi parameter"))?;
                Self::renyi(q)
            }
        }
    }
}

fn check_probability_vector(p: &[f64], tol: &Tolerances) -> Result<()> {
    if p.is_empty() {
        return Err(Error::NotAProbabilityVector { reason: "empty" });
    }
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Error::NotAProbabilityVector { reason: "non-finite entry" });
    }
    if p.iter().any(|&x| x < -tol.prob) {
        return Err(Error::NotAProbabilityVector { reason: "negative entry" });
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol.prob {
        return Err(Error::NotAProbabilityVector { reason: "entries do not sum to 1" });
    }
    Ok(())
}

pub fn shannon(p: &[f64], tol: &Tolerances) -> Result<f64> {
    check_probability_vector(p, tol)?;
    Ok(shannon_unchecked(p))
}

pub(crate) fn shannon_unchecked(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * libm::log(x)).sum();
    h.max(0.0)
}

/// Any member of the family. Hartley counts entries above `tol.prob`.
pub fn renyi(kind: EntropyKind, p: &[f64], tol: &Tolerances) -> Result<f64> {
    check_probability_vector(p, tol)?;
    Ok(entropy_unchecked(kind, p, tol.prob))
}

/// Alias of [`renyi`], which already dispatches on the kind.
pub fn entropy(kind: EntropyKind, p: &[f64], tol: &Tolerances) -> Result<f64> {
    renyi(kind, p, tol)
}

pub(crate) fn entropy_unchecked(kind: EntropyKind, p: &[f64], zero_tol: f64) -> f64 {
    match kind {
        EntropyKind::Shannon => shannon_unchecked(p),
        EntropyKind::Hartley => {
            let k = p.iter().filter(|&&x| x > zero_tol).count().max(1);
            libm::log(k as f64)
        }
        EntropyKind::Chebyshev => {
            let m = p.iter().copied().fold(0.0, f64::max);
            (-libm::log(m)).max(0.0)
        }
        EntropyKind::Renyi(q) if (q - 1.0).abs() < SHANNON_WINDOW => shannon_unchecked(p),
        EntropyKind::Renyi(q) => {
            // ln Σ p^q = q ln p_max + ln Σ (p/p_max)^q keeps large q from underflowing.
            let pmax = p.iter().copied().fold(0.0, f64::max);
            if pmax <= 0.0 {
                return 0.0;
            }
            let s: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| libm::pow(x / pmax, q)).sum();
            let ln_sum = q * libm::log(pmax) + libm::log(s);
            (ln_sum / (1.0 - q)).max(0.0)
        }
    }
}

/// The entropy of the probability vector ρ induces at a context.
pub fn contextual_entropy(rho: &DensityMatrix, ctx: &Context, kind: EntropyKind, tol: &Tolerances) -> Result<f64> {
    let p = probabilities(rho, ctx, tol)?;
    Ok(entropy_unchecked(kind, &p, tol.prob))
}

/// Groupwise sums of `p`.
pub fn coarse_grain(p: &[f64], partition: &[Vec<usize>]) -> Result<Vec<f64>> {
    validate_partition(partition, p.len())?;
    Ok(partition.iter().map(|g| g.iter().map(|&i| p[i]).sum()).collect())
}

/// |Sh(V′) − Sh(V) − Σ_i μ(P_i)·Sh(μ(Q_ij)/μ(P_i))| for a refinement pair V ⊆ V′.
///
/// Coarse outcomes with μ(P_i) ≤ tol.prob contribute nothing to the conditional sum.
pub fn check_recursion(rho: &DensityMatrix, coarse: &Context, fine: &Context, tol: &Tolerances) -> Result<f64> {
    let partition = refines(fine, coarse, tol).ok_or(Error::NotARefinement)?;
    let pf = probabilities(rho, fine, tol)?;
    let pc = probabilities(rho, coarse, tol)?;
    let lhs = shannon_unchecked(&pf);
    let mut rhs = shannon_unchecked(&pc);
    for (group, &mass) in partition.iter().zip(&pc) {
        if mass <= tol.prob {
            continue;
        }
        let conditional: Vec<f64> = group.iter().map(|&j| pf[j] / mass).collect();
        rhs += mass * shannon_unchecked(&conditional);
    }
    Ok((lhs - rhs).abs())
}

/// Entropy does not increase under coarse-graining: S(p) ≥ S(coarse_grain(p)) − tol.prob.
pub fn check_weak_recursivity(kind: EntropyKind, p: &[f64], partition: &[Vec<usize>], tol: &Tolerances) -> Result<bool> {
    let coarse = coarse_grain(p, partition)?;
    Ok(renyi(kind, p, tol)? >= renyi(kind, &coarse, tol)? - tol.prob)
}

/// S(x, 1 − x).
pub fn two_outcome_entropy(kind: EntropyKind, x: f64) -> f64 {
    entropy_unchecked(kind, &[x, 1.0 - x], 0.0)
}

/// Solves S(x, 1 − x) = target for the root on [0, ½]; returns `(x, 1 − x)`.
///
/// Bisection on [0, ½], where the two-outcome entropy is strictly increasing for every kind
/// except Hartley. Targets above ln 2 + tol.inv cannot come from any state.
pub fn invert_two_outcome(kind: EntropyKind, target: f64, tol: &Tolerances) -> Result<(f64, f64)> {
    if !kind.supports_inversion() {
        return Err(Error::UnsupportedKind { kind: kind.name() });
    }
    if target.is_nan() || target < -tol.inv {
        return Err(Error::TargetNegative { target });
    }
    let top = two_outcome_entropy(kind, 0.5);
    if target > core::f64::consts::LN_2.max(top) + tol.inv {
        return Err(Error::TargetOutOfRange { target });
    }
    if target <= 0.0 {
        return Ok((0.0, 1.0));
    }
    if target >= top {
        return Ok((0.5, 0.5));
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if two_outcome_entropy(kind, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = if (two_outcome_entropy(kind, lo) - target).abs() <= (two_outcome_entropy(kind, hi) - target).abs() {
        lo
    } else {
        hi
    };
    Ok((x, 1.0 - x))
}

/// `points` samples of S(x, 1 − x) on the uniform grid x_k = k/(points − 1).
pub fn two_outcome_curve(kind: EntropyKind, points: usize) -> Vec<(f64, f64)> {
    let last = points.saturating_sub(1).max(1) as f64;
    (0..points)
        .map(|k| {
            let x = k as f64 / last;
            (x, two_outcome_entropy(kind, x))
        })
        .collect()
}
