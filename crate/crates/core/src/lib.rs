//! # ctxent-core
//!
//! Contextual entropy of finite-dimensional quantum states.
//!
//! A *context* is a commutative subalgebra of the n×n matrices, given concretely by a family of
//! pairwise-orthogonal projections summing to the identity. A density matrix induces a
//! probability vector on every context, and the Shannon (or Rényi) entropy of that vector is the
//! value of the *contextual entropy* at the context. This crate provides:
//!
//! - dense complex linear algebra sized for n ≤ 16 ([`matrix`], [`linalg`], [`state`]),
//! - Haar-random unitaries and states ([`random`]),
//! - contexts, refinement and split contexts, and the unitary-equivalence distance ([`context`],
//!   [`distance`]),
//! - the contextual measure and its finite-additivity / partial-trace checks ([`measure`]),
//! - Shannon and Rényi entropies, their contextual lifts, recursion identities and two-outcome
//!   inversion ([`entropy`]),
//! - entropy oracles ([`oracle`]),
//! - von Neumann extraction by minimizing an oracle over maximal contexts ([`minimizer`]),
//! - reconstruction of the density matrix from an entropy oracle ([`reconstruct`]),
//! - property batteries over random states and contexts ([`props`]).
//!
//! The crate is `no_std` and needs only `alloc`. File formats and the command-line tool live in
//! the companion `ctxent` crate.
//!
//! ```
//! use ctxent_core::prelude::*;
//!
//! let rho = DensityMatrix::from_diagonal(&[0.5, 0.3, 0.2], &Tolerances::default()).unwrap();
//! let basis = Context::computational(3).unwrap();
//! let h = contextual_entropy(&rho, &basis, EntropyKind::Shannon, &Tolerances::default()).unwrap();
//! assert!((h - rho.von_neumann_entropy().unwrap()).abs() < 1e-12);
//! ```

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod context;
pub mod distance;
pub mod entropy;
mod error;
pub mod linalg;
pub mod matrix;
pub mod measure;
pub mod minimizer;
pub mod oracle;
pub mod props;
pub mod random;
pub mod reconstruct;
pub mod state;
mod tol;

pub use error::Error;
pub use tol::Tolerances;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub mod prelude {
    pub use crate::context::{Context, MaximalContext};
    pub use crate::distance::{context_distance, Distance};
    pub use crate::entropy::{contextual_entropy, invert_two_outcome, EntropyKind};
    pub use crate::matrix::CMatrix;
    pub use crate::measure::{measure_eval, CheckReport, ContextProbability};
    pub use crate::minimizer::{minimize_over_maximal_contexts, MinimizerConfig, MinimizerResult};
    pub use crate::oracle::{EntropyOracle, StateOracle};
    pub use crate::reconstruct::{reconstruct, Outcome, ReconstructionConfig, ReconstructionResult};
    pub use crate::state::{DensityMatrix, Projection, Unitary};
    pub use crate::{Error, Result, Tolerances, C64};
}
