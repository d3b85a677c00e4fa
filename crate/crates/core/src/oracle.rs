//! Entropy oracles: black boxes mapping a context to a value in [0, ln n].
//!
//! Reconstruction and von Neumann extraction only ever talk to an [`EntropyOracle`]. Oracles are
//! `Sync` so that independent queries may be issued from several workers.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use crate::context::{projection_key, Context};
use crate::entropy::{contextual_entropy, EntropyKind};
use crate::state::DensityMatrix;
use crate::{Error, Result, Tolerances};

pub trait EntropyOracle: Sync {
    fn dim(&self) -> usize;

    fn query(&self, ctx: &Context) -> Result<f64>;
}

impl<O: EntropyOracle + ?Sized> EntropyOracle for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn query(&self, ctx: &Context) -> Result<f64> {
        (**self).query(ctx)
    }
}

impl<O: EntropyOracle + ?Sized> EntropyOracle for Box<O> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn query(&self, ctx: &Context) -> Result<f64> {
        (**self).query(ctx)
    }
}

/// The contextual entropy of a stored state.
#[derive(Debug, Clone)]
pub struct StateOracle {
    rho: DensityMatrix,
    kind: EntropyKind,
    tol: Tolerances,
}

impl StateOracle {
    pub fn new(rho: DensityMatrix, kind: EntropyKind) -> Self {
        Self { rho, kind, tol: Tolerances::default() }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn kind(&self) -> EntropyKind {
        self.kind
    }
}

impl EntropyOracle for StateOracle {
    fn dim(&self) -> usize {
        self.rho.dim()
    }

    fn query(&self, ctx: &Context) -> Result<f64> {
        contextual_entropy(&self.rho, ctx, self.kind, &self.tol)
    }
}

/// An oracle backed by a closure, for synthetic or adversarial sections.
pub struct FnOracle<F> {
    dim: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&Context) -> f64 + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> EntropyOracle for FnOracle<F>
where
    F: Fn(&Context) -> f64 + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn query(&self, ctx: &Context) -> Result<f64> {
        if ctx.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: ctx.dim() });
        }
        Ok((self.f)(ctx))
    }
}

/// Wraps an oracle with a query budget and a counter.
pub struct Budgeted<O> {
    inner: O,
    budget: Option<usize>,
    used: AtomicUsize,
}

impl<O: EntropyOracle> Budgeted<O> {
    pub fn new(inner: O, budget: Option<usize>) -> Self {
        Self { inner, budget, used: AtomicUsize::new(0) }
    }

    pub fn used(&self) -> usize {
        self.used.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: EntropyOracle> EntropyOracle for Budgeted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query(&self, ctx: &Context) -> Result<f64> {
        let n = self.used.fetch_add(1, Ordering::Relaxed);
        if let Some(budget) = self.budget {
            if n >= budget {
                self.used.fetch_sub(1, Ordering::Relaxed);
                return Err(Error::BudgetExhausted { budget });
            }
        }
        self.inner.query(ctx)
    }
}

/// A finite sample of an entropy section: (context, value) pairs.
#[derive(Debug, Clone, Default)]
pub struct EntropySectionSample {
    pub dim: usize,
    pub entries: Vec<(Context, f64)>,
}

impl EntropySectionSample {
    /// Checks dimensions and that every value lies in [0, ln n] (with `slack`).
    pub fn new(dim: usize, entries: Vec<(Context, f64)>, slack: f64) -> Result<Self> {
        let top = libm::log(dim as f64);
        for (ctx, value) in &entries {
            if ctx.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: ctx.dim() });
            }
            if !value.is_finite() || *value < -slack || *value > top + slack {
                return Err(Error::ValueOutOfRange { value: *value });
            }
        }
        Ok(Self { dim, entries })
    }
}

/// Lookup key of a context: its canonical projections rounded to 1e-8.
pub fn context_key(ctx: &Context) -> Vec<i64> {
    ctx.projections().iter().flat_map(projection_key).collect()
}

/// A memoised oracle answering only the contexts present in a sample.
///
/// Contexts are bucketed by [`context_key`]. Inside a bucket the stored context closest to
/// the query answers, and among equally close ones the later entry wins, so nearby contexts
/// sharing a key replay their own values.
#[derive(Debug, Clone)]
pub struct SampleOracle {
    dim: usize,
    values: BTreeMap<Vec<i64>, Vec<(Context, f64)>>,
}

impl SampleOracle {
    pub fn new(sample: &EntropySectionSample) -> Self {
        let mut values: BTreeMap<Vec<i64>, Vec<(Context, f64)>> = BTreeMap::new();
        for (c, v) in &sample.entries {
            values.entry(context_key(c)).or_default().push((c.clone(), *v));
        }
        Self { dim: sample.dim, values }
    }

    /// Number of distinct keys.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn projection_gap(a: &Context, b: &Context) -> f64 {
    a.projections()
        .iter()
        .zip(b.projections())
        .flat_map(|(p, q)| p.matrix().entries().iter().zip(q.matrix().entries()))
        .map(|(x, y)| (*x - *y).norm())
        .sum()
}

impl EntropyOracle for SampleOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn query(&self, ctx: &Context) -> Result<f64> {
        if ctx.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: ctx.dim() });
        }
        let bucket = self.values.get(&context_key(ctx)).ok_or(Error::UnknownContext)?;
        let mut best = (f64::INFINITY, 0.0);
        for (c, v) in bucket {
            let gap = projection_gap(c, ctx);
            if gap <= best.0 {
                best = (gap, *v);
            }
        }
        Ok(best.1)
    }
}
