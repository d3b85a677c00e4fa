use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Validation failures carry the measured residual so callers can report how far off an input
/// was, not just that it was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("expected {expected} entries, got {got}")]
    BadShape { expected: usize, got: usize },

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not Hermitian (max |A - A^dagger| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("trace is not 1 (|Tr - 1| = {residual:e})")]
    NotUnitTrace { residual: f64 },

    #[error("not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("not idempotent (max |P^2 - P| = {residual:e})")]
    NotIdempotent { residual: f64 },

    #[error("trace of projection is not an integer (distance {residual:e})")]
    NonIntegerRank { residual: f64 },

    #[error("not unitary (max |U U^dagger - I| = {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("rank {rank} invalid for dimension {dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("projections {first} and {second} are not orthogonal (residual {residual:e})")]
    NotOrthogonal { first: usize, second: usize, residual: f64 },

    #[error("projections do not sum to the identity (residual {residual:e})")]
    NotComplete { residual: f64 },

    #[error("projection {index} is zero")]
    ZeroProjection { index: usize },

    #[error("a context needs at least two projections")]
    TrivialContext,

    #[error("empty projection list")]
    EmptyContext,

    #[error("not a probability vector ({reason})")]
    NotAProbabilityVector { reason: &'static str },

    #[error("partition does not cover 0..{len} disjointly")]
    BadPartition { len: usize },

    #[error("the fine context does not refine the coarse one")]
    NotARefinement,

    #[error("target {target} exceeds the two-outcome maximum ln 2")]
    TargetOutOfRange { target: f64 },

    #[error("target {target} is negative")]
    TargetNegative { target: f64 },

    #[error("entropy kind {kind} is not supported here")]
    UnsupportedKind { kind: &'static str },

    #[error("invalid Renyi parameter {q}")]
    BadRenyiParameter { q: f64 },

    #[error("oracle query budget of {budget} exhausted")]
    BudgetExhausted { budget: usize },

    #[error("no rotated context reads zero entropy")]
    NoZeroContext,

    #[error("{count} rotated contexts read zero entropy")]
    MultipleZeroContexts { count: usize },

    #[error("probability {value} escaped [0, 1] beyond tolerance")]
    NumericalBreakdown { value: f64 },

    #[error("eigen-decomposition did not converge")]
    NoConvergence,

    #[error("entropy value {value} outside [0, ln n]")]
    ValueOutOfRange { value: f64 },

    #[error("context not present in the entropy sample")]
    UnknownContext,

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
