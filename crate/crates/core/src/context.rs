//! Contexts: commutative subalgebras generated by complete families of orthogonal projections.
//!
//! A context is stored by its generating projections in a canonical order (descending rank, then
//! descending lexicographic order of the entries rounded to 1e-8, real parts before imaginary
//! parts), so two listings of the same subalgebra compare equal. The trivial context {I} is
//! excluded. The poset of all contexts is never materialised; everything here works on explicit
//! contexts.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::matrix::CMatrix;
use crate::random::haar_unitary_from;
use crate::state::{Projection, Unitary};
use crate::{Error, Result, Tolerances, C64};

/// Resolution of the canonical ordering key.
const KEY_SCALE: f64 = 1e8;

/// A unitary whose columns, grouped by `partition`, span the projections of a context.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub unitary: Unitary,
    /// `partition[i]` lists the columns of `unitary` spanning the i-th canonical projection.
    pub partition: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    dim: usize,
    projections: Vec<Projection>,
    /// `canonical_order[i]` is the input position of the i-th canonical projection.
    canonical_order: Vec<usize>,
    generator: Option<Generator>,
}

/// A context generated by n rank-one projections, with the unitary whose i-th column spans the
/// i-th canonical projection.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalContext {
    context: Context,
    unitary: Unitary,
}

/// Ordering key of a projection: rank, then rounded real parts, then rounded imaginary parts.
pub(crate) fn projection_key(p: &Projection) -> Vec<i64> {
    let m = p.matrix();
    let mut key = Vec::with_capacity(1 + 2 * m.entries().len());
    key.push(p.rank() as i64);
    key.extend(m.entries().iter().map(|z| libm::round(z.re * KEY_SCALE) as i64));
    key.extend(m.entries().iter().map(|z| libm::round(z.im * KEY_SCALE) as i64));
    key
}

fn canonical_permutation(ps: &[Projection]) -> Vec<usize> {
    let keys: Vec<Vec<i64>> = ps.iter().map(projection_key).collect();
    let mut order: Vec<usize> = (0..ps.len()).collect();
    // Descending on the whole key: larger rank first, then larger entries first.
    order.sort_by(|&a, &b| keys[b].cmp(&keys[a]).then(a.cmp(&b)));
    order
}

impl Context {
    /// Validates a family of projections and stores it in canonical order.
    pub fn from_projections(ps: Vec<Projection>, tol: &Tolerances) -> Result<Self> {
        let Some(first) = ps.first() else {
            return Err(Error::EmptyContext);
        };
        let dim = first.dim();
        for p in &ps {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        if let Some(index) = ps.iter().position(|p| p.rank() == 0) {
            return Err(Error::ZeroProjection { index });
        }
        for i in 0..ps.len() {
            for j in (i + 1)..ps.len() {
                let residual = ps[i].matrix().matmul(ps[j].matrix()).max_abs();
                if residual > tol.proj {
                    return Err(Error::NotOrthogonal { first: i, second: j, residual });
                }
            }
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for p in &ps {
            sum = &sum + p.matrix();
        }
        let residual = sum.max_abs_diff(&CMatrix::identity(dim));
        if residual > tol.proj {
            return Err(Error::NotComplete { residual });
        }
        if ps.len() < 2 {
            return Err(Error::TrivialContext);
        }
        Ok(Self::assemble(dim, ps, None))
    }

    fn assemble(dim: usize, ps: Vec<Projection>, generator: Option<Generator>) -> Self {
        let order = canonical_permutation(&ps);
        let mut slots: Vec<Option<Projection>> = ps.into_iter().map(Some).collect();
        let projections = order.iter().map(|&i| slots[i].take().expect("permutation")).collect();
        let generator = generator.map(|g| Generator {
            unitary: g.unitary,
            partition: order.iter().map(|&i| g.partition[i].clone()).collect(),
        });
        Self { dim, projections, canonical_order: order, generator }
    }

    /// The context spanned by groups of columns of a unitary ("a rotated coarse-graining").
    pub fn from_unitary_partition(u: &Unitary, partition: &[Vec<usize>]) -> Result<Self> {
        let n = u.dim();
        check_partition(partition, n)?;
        if partition.len() < 2 {
            return Err(Error::TrivialContext);
        }
        let ps = partition
            .iter()
            .map(|g| {
                let cols: Vec<Vec<C64>> = g.iter().map(|&c| u.column(c)).collect();
                Projection::from_orthonormal(&cols, n)
            })
            .collect();
        let generator = Generator { unitary: u.clone(), partition: partition.to_vec() };
        Ok(Self::assemble(n, ps, Some(generator)))
    }

    /// D_n, the computational-basis context.
    pub fn computational(n: usize) -> Result<Self> {
        Ok(MaximalContext::from_unitary(&Unitary::identity(n))?.into_context())
    }

    /// The two-outcome context {P, I − P}.
    pub fn two_outcome(p: &Projection) -> Result<Self> {
        let n = p.dim();
        if p.rank() == 0 || p.rank() == n {
            return Err(Error::TrivialContext);
        }
        Ok(Self::assemble(n, vec![p.clone(), p.complement()], None))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn projections(&self) -> &[Projection] {
        &self.projections
    }

    pub fn canonical_order(&self) -> &[usize] {
        &self.canonical_order
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.projections.iter().map(Projection::rank).collect()
    }

    pub fn is_maximal(&self) -> bool {
        self.len() == self.dim
    }

    /// Equality of canonical forms within `tol` (entrywise).
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self.projections.iter().zip(&other.projections).all(|(a, b)| {
                a.rank() == b.rank() && a.matrix().max_abs_diff(b.matrix()) <= tol
            })
    }

    /// U V U†.
    pub fn conjugated_by(&self, u: &Unitary) -> Self {
        let ps = self.projections.iter().map(|p| p.conjugated_by(u)).collect();
        let generator = self.generator.as_ref().map(|g| Generator {
            unitary: u.compose(&g.unitary),
            partition: g.partition.clone(),
        });
        Self::assemble(self.dim, ps, generator)
    }

    /// Merges projections groupwise. The groups index canonical positions of `self`.
    pub fn coarsen(&self, partition: &[Vec<usize>]) -> Result<Self> {
        check_partition(partition, self.len())?;
        if partition.len() < 2 {
            return Err(Error::TrivialContext);
        }
        let ps = partition
            .iter()
            .map(|g| {
                let mut m = CMatrix::zeros(self.dim, self.dim);
                let mut rank = 0;
                for &i in g {
                    m = &m + self.projections[i].matrix();
                    rank += self.projections[i].rank();
                }
                Projection::from_parts(m, rank)
            })
            .collect();
        let generator = self.generator.as_ref().map(|gen| Generator {
            unitary: gen.unitary.clone(),
            partition: partition.iter().map(|g| g.iter().flat_map(|&i| gen.partition[i].clone()).collect()).collect(),
        });
        Ok(Self::assemble(self.dim, ps, generator))
    }

    /// {P_i ⊗ I_m}: this context lifted to the first factor of an n·m composite.
    pub fn lift_first(&self, m: usize) -> Self {
        let id = Projection::identity(m);
        Self::assemble(self.dim * m, self.projections.iter().map(|p| p.tensor(&id)).collect(), None)
    }

    /// {I_n ⊗ Q_j}: this context lifted to the second factor of an n·m composite.
    pub fn lift_second(&self, n: usize) -> Self {
        let id = Projection::identity(n);
        Self::assemble(self.dim * n, self.projections.iter().map(|q| id.tensor(q)).collect(), None)
    }

    /// The 2-element context {P_i, I − P_i} around the i-th canonical projection.
    pub fn binary_around(&self, i: usize) -> Result<Self> {
        Self::two_outcome(&self.projections[i])
    }
}

fn check_partition(partition: &[Vec<usize>], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    for g in partition {
        if g.is_empty() {
            return Err(Error::BadPartition { len });
        }
        for &i in g {
            if i >= len || seen[i] {
                return Err(Error::BadPartition { len });
            }
            seen[i] = true;
        }
    }
    if seen.iter().all(|&s| s) {
        Ok(())
    } else {
        Err(Error::BadPartition { len })
    }
}

pub(crate) fn validate_partition(partition: &[Vec<usize>], len: usize) -> Result<()> {
    check_partition(partition, len)
}

impl MaximalContext {
    /// Rank-one projections onto the columns of `u`, canonically ordered.
    pub fn from_unitary(u: &Unitary) -> Result<Self> {
        let n = u.dim();
        if n < 2 {
            return Err(Error::TrivialContext);
        }
        let partition: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
        let ctx = Context::from_unitary_partition(u, &partition)?;
        let order: Vec<usize> = ctx.canonical_order.clone();
        let mut m = CMatrix::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            m.set_column(new, &u.column(old));
        }
        let unitary = Unitary::new_unchecked(m);
        let context = Context {
            generator: Some(Generator { unitary: unitary.clone(), partition }),
            ..ctx
        };
        Ok(Self { context, unitary })
    }

    /// Recovers the generating unitary of a maximal context given by projections.
    pub fn from_context(ctx: &Context) -> Result<Self> {
        if !ctx.is_maximal() || ctx.projections.iter().any(|p| p.rank() != 1) {
            return Err(Error::BadRank { rank: ctx.len(), dim: ctx.dim });
        }
        let cols: Vec<Vec<C64>> =
            ctx.projections.iter().map(|p| p.range_basis().map(|mut b| b.remove(0))).collect::<Result<_>>()?;
        let unitary = Unitary::new_unchecked(CMatrix::from_columns(&cols));
        let partition = (0..ctx.dim).map(|j| vec![j]).collect();
        let context = Context { generator: Some(Generator { unitary: unitary.clone(), partition }), ..ctx.clone() };
        Ok(Self { context, unitary })
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn into_context(self) -> Context {
        self.context
    }

    pub fn unitary(&self) -> &Unitary {
        &self.unitary
    }

    pub fn dim(&self) -> usize {
        self.context.dim
    }
}

/// Refinement test: `Some(partition)` when every projection of `coarse` is a sum of a group of
/// projections of `fine`. `partition[i]` lists the fine indices summing to the i-th coarse
/// projection.
pub fn refines(fine: &Context, coarse: &Context, tol: &Tolerances) -> Option<Vec<Vec<usize>>> {
    if fine.dim != coarse.dim || fine.len() < coarse.len() {
        return None;
    }
    let mut partition = vec![Vec::new(); coarse.len()];
    for (j, q) in fine.projections.iter().enumerate() {
        // Q ≤ P  ⟺  P Q = Q
        let owner = coarse
            .projections
            .iter()
            .position(|p| p.matrix().matmul(q.matrix()).max_abs_diff(q.matrix()) <= tol.proj.max(1e-9))?;
        partition[owner].push(j);
    }
    for (p, group) in coarse.projections.iter().zip(&partition) {
        if group.is_empty() {
            return None;
        }
        let mut sum = CMatrix::zeros(fine.dim, fine.dim);
        for &j in group {
            sum = &sum + fine.projections[j].matrix();
        }
        if sum.max_abs_diff(p.matrix()) > tol.proj.max(1e-9) {
            return None;
        }
    }
    Some(partition)
}

/// The split context V ⊗ W = {P_i ⊗ Q_j}.
pub fn split_context(v: &Context, w: &Context) -> Context {
    let ps = v.projections.iter().flat_map(|p| w.projections.iter().map(move |q| p.tensor(q))).collect();
    let generator = match (&v.generator, &w.generator) {
        (Some(gv), Some(gw)) => {
            let m = gw.unitary.dim();
            let u = Unitary::new_unchecked(gv.unitary.matrix().kron(gw.unitary.matrix()));
            let partition = gv
                .partition
                .iter()
                .flat_map(|a| {
                    gw.partition.iter().map(move |b| a.iter().flat_map(|&i| b.iter().map(move |&k| i * m + k)).collect())
                })
                .collect();
            Some(Generator { unitary: u, partition })
        }
        _ => None,
    };
    Context::assemble(v.dim * w.dim, ps, generator)
}

/// Random rank profile: a composition of `n` into `k ≥ 2` positive parts, k uniform in 2..=n.
pub fn random_rank_profile<R: Rng + ?Sized>(n: usize, r: &mut R) -> Vec<usize> {
    let k = r.random_range(2..=n);
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(r);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut ranks = Vec::with_capacity(k);
    for c in cuts.into_iter().chain(core::iter::once(n)) {
        ranks.push(c - prev);
        prev = c;
    }
    ranks
}

/// Consecutive column groups with the given sizes.
pub fn partition_from_ranks(ranks: &[usize]) -> Vec<Vec<usize>> {
    let mut start = 0;
    ranks
        .iter()
        .map(|&r| {
            let g = (start..start + r).collect();
            start += r;
            g
        })
        .collect()
}

/// A Haar-rotated context with a random rank profile (maximal contexts included).
pub fn random_context<R: Rng + ?Sized>(n: usize, r: &mut R) -> Context {
    let ranks = random_rank_profile(n, r);
    random_context_with_ranks(&ranks, r)
}

pub fn random_context_with_ranks<R: Rng + ?Sized>(ranks: &[usize], r: &mut R) -> Context {
    let n = ranks.iter().sum();
    let u = haar_unitary_from(n, r);
    Context::from_unitary_partition(&u, &partition_from_ranks(ranks)).expect("valid rank profile")
}

pub fn random_maximal_context<R: Rng + ?Sized>(n: usize, r: &mut R) -> MaximalContext {
    MaximalContext::from_unitary(&haar_unitary_from(n, r)).expect("n >= 2")
}

/// A random grouping of `0..len` into at least two nonempty groups (requires len ≥ 2).
pub fn random_partition<R: Rng + ?Sized>(len: usize, r: &mut R) -> Vec<Vec<usize>> {
    let ranks = random_rank_profile(len, r);
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(r);
    let mut start = 0;
    ranks
        .iter()
        .map(|&k| {
            let mut g: Vec<usize> = idx[start..start + k].to_vec();
            g.sort_unstable();
            start += k;
            g
        })
        .collect()
}

/// Compares two contexts by canonical listing; `Equal` means identical rounded keys.
pub fn canonical_cmp(a: &Context, b: &Context) -> Ordering {
    a.dim.cmp(&b.dim).then_with(|| {
        let ka: Vec<Vec<i64>> = a.projections.iter().map(projection_key).collect();
        let kb: Vec<Vec<i64>> = b.projections.iter().map(projection_key).collect();
        ka.cmp(&kb)
    })
}
