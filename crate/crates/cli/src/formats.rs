//! JSON file formats for matrices, contexts, entropy-section samples and results.
//!
//! A matrix is `{"dim": n, "entries": [[re, im], ...]}` with n² entries in row-major order.
//! A context is either `{"dim": n, "projections": [matrix, ...]}` or
//! `{"unitary": matrix, "partition": [[column, ...], ...]}`.

use std::fs;
use std::io::Write;
use std::path::Path;

use ctxent_core::context::Context;
use ctxent_core::entropy::EntropyKind;
use ctxent_core::matrix::CMatrix;
use ctxent_core::measure::CheckReport;
use ctxent_core::minimizer::MinimizerResult;
use ctxent_core::oracle::EntropySectionSample;
use ctxent_core::reconstruct::{InfeasibleReason, Outcome, ReconstructionResult};
use ctxent_core::state::{DensityMatrix, Projection, Unitary};
use ctxent_core::{Tolerances, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self { dim: m.rows(), entries: m.entries().iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn to_matrix(&self) -> Result<CMatrix, CliError> {
        let data = self.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        Ok(CMatrix::from_row_major(self.dim, self.dim, data)?)
    }

    pub fn to_state(&self, tol: &Tolerances) -> Result<DensityMatrix, CliError> {
        Ok(DensityMatrix::validate(self.to_matrix()?, tol)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ContextJson {
    Projections { dim: usize, projections: Vec<MatrixJson> },
    Generated { unitary: MatrixJson, partition: Vec<Vec<usize>> },
}

impl ContextJson {
    /// Stores the canonical projections, so that reloading reproduces the context exactly.
    pub fn from_context(ctx: &Context) -> Self {
        Self::Projections {
            dim: ctx.dim(),
            projections: ctx.projections().iter().map(|p| MatrixJson::from_matrix(p.matrix())).collect(),
        }
    }

    pub fn to_context(&self, tol: &Tolerances) -> Result<Context, CliError> {
        match self {
            Self::Projections { dim, projections } => {
                let ps = projections
                    .iter()
                    .map(|m| {
                        if m.dim != *dim {
                            return Err(CliError::Input(format!("projection of dimension {} in a {dim}-dimensional context", m.dim)));
                        }
                        Ok(Projection::new(m.to_matrix()?, tol)?)
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                Ok(Context::from_projections(ps, tol)?)
            }
            Self::Generated { unitary, partition } => {
                let u = Unitary::new(unitary.to_matrix()?, tol)?;
                Ok(Context::from_unitary_partition(&u, partition)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionEntryJson {
    pub context: ContextJson,
    pub value: f64,
}

/// A finite sample of an entropy section, as recorded from an oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionJson {
    pub dim: usize,
    pub kind: String,
    pub entries: Vec<SectionEntryJson>,
}

impl SectionJson {
    pub fn from_sample(sample: &EntropySectionSample, kind: EntropyKind) -> Self {
        Self {
            dim: sample.dim,
            kind: kind.to_string(),
            entries: sample
                .entries
                .iter()
                .map(|(c, v)| SectionEntryJson { context: ContextJson::from_context(c), value: *v })
                .collect(),
        }
    }

    pub fn kind(&self) -> Result<EntropyKind, CliError> {
        self.kind.parse().map_err(CliError::from)
    }

    /// Values may sit outside [0, ln n] by at most `slack`.
    pub fn to_sample(&self, tol: &Tolerances, slack: f64) -> Result<EntropySectionSample, CliError> {
        let entries = self
            .entries
            .iter()
            .map(|e| Ok((e.context.to_context(tol)?, e.value)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(EntropySectionSample::new(self.dim, entries, slack)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub check: String,
    pub max_residual: f64,
    pub trials: usize,
    pub pass: bool,
}

impl From<&CheckReport> for ReportJson {
    fn from(r: &CheckReport) -> Self {
        Self { check: r.check.to_string(), max_residual: r.max_residual, trials: r.trials, pass: r.pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerJson {
    pub best_value: f64,
    /// Columns span the rank-one projections of the minimising context.
    pub best_unitary: MatrixJson,
    pub value_trace: Vec<f64>,
    pub queries_used: usize,
    pub converged: bool,
    pub best_restart: usize,
    pub restart_values: Vec<f64>,
}

impl From<&MinimizerResult> for MinimizerJson {
    fn from(r: &MinimizerResult) -> Self {
        Self {
            best_value: r.best_value,
            best_unitary: MatrixJson::from_matrix(r.best_context.unitary().matrix()),
            value_trace: r.value_trace.clone(),
            queries_used: r.queries_used,
            converged: r.converged,
            best_restart: r.best_restart,
            restart_values: r.restart_values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonJson {
    pub name: String,
    pub detail: serde_json::Value,
}

impl From<&InfeasibleReason> for ReasonJson {
    fn from(r: &InfeasibleReason) -> Self {
        use serde_json::json;
        let detail = match r {
            InfeasibleReason::TwoOutcomeAboveLn2 { index, value } => json!({ "index": index, "value": value }),
            InfeasibleReason::SumExceedsOne { sum } | InfeasibleReason::NoTieMatch { sum } => json!({ "sum": sum }),
            InfeasibleReason::AmbiguousTie { matches } => json!({ "matches": matches }),
            InfeasibleReason::VerificationFailed { max_residual, tol } => json!({ "max_residual": max_residual, "tol": tol }),
            InfeasibleReason::TieBreakFailed | InfeasibleReason::PureReconstructionFailed => json!({}),
        };
        Self { name: r.name().to_string(), detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionJson {
    /// `unique`, `ambiguous_pair` or `infeasible`.
    pub outcome: String,
    pub states: Vec<MatrixJson>,
    pub reason: Option<ReasonJson>,
    pub branch: Option<String>,
    pub minimum: f64,
    pub minimizer_converged: bool,
    pub p: Vec<f64>,
    pub sum: Option<f64>,
    pub queries: usize,
    pub verification: Option<ReportJson>,
    /// Distance from the generating state to the closest reconstructed state, when known.
    pub trace_distance: Option<f64>,
}

impl ReconstructionJson {
    pub fn new(r: &ReconstructionResult, source: Option<&DensityMatrix>) -> Result<Self, CliError> {
        let (outcome, states, reason) = match &r.outcome {
            Outcome::Unique(s) => ("unique", vec![s.clone()], None),
            Outcome::AmbiguousPair(a, b) => ("ambiguous_pair", vec![a.clone(), b.clone()], None),
            Outcome::Infeasible(why) => ("infeasible", Vec::new(), Some(ReasonJson::from(why))),
        };
        let trace_distance = match source {
            Some(src) if !states.is_empty() => {
                let mut best = f64::INFINITY;
                for s in &states {
                    best = best.min(s.trace_distance(src)?);
                }
                Some(best)
            }
            _ => None,
        };
        Ok(Self {
            outcome: outcome.to_string(),
            states: states.iter().map(|s| MatrixJson::from_matrix(s.matrix())).collect(),
            reason,
            branch: r.branch.map(|b| b.name().to_string()),
            minimum: r.minimum,
            minimizer_converged: r.minimizer_converged,
            p: r.p.clone(),
            sum: r.sum,
            queries: r.queries,
            verification: r.verification.as_ref().map(ReportJson::from),
            trace_distance,
        })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Writes via a temporary file in the target directory, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctxent_core::random::{random_density, rng};

    #[test]
    fn matrix_round_trip_is_exact() {
        let rho = random_density(3, 2, 4).unwrap();
        let json = serde_json::to_string(&MatrixJson::from_matrix(rho.matrix())).unwrap();
        let back: MatrixJson = serde_json::from_str(&json).unwrap();
        assert_eq!(&back.to_matrix().unwrap(), rho.matrix());
    }

    #[test]
    fn wrong_entry_count_is_rejected() {
        let m = MatrixJson { dim: 2, entries: vec![[1.0, 0.0]; 3] };
        assert!(matches!(m.to_matrix(), Err(CliError::Core(_))));
    }

    #[test]
    fn context_round_trip_keeps_the_lookup_key() {
        let tol = Tolerances::default();
        let ctx = ctxent_core::context::random_context(4, &mut rng(1, 1));
        let json = serde_json::to_string(&ContextJson::from_context(&ctx)).unwrap();
        let back: ContextJson = serde_json::from_str(&json).unwrap();
        let back = back.to_context(&tol).unwrap();
        assert_eq!(ctxent_core::oracle::context_key(&back), ctxent_core::oracle::context_key(&ctx));
    }

    #[test]
    fn generated_context_form() {
        let text = r#"{"unitary": {"dim": 2, "entries": [[1,0],[0,0],[0,0],[1,0]]}, "partition": [[0],[1]]}"#;
        let c: ContextJson = serde_json::from_str(text).unwrap();
        assert_eq!(c.to_context(&Tolerances::default()).unwrap().len(), 2);
    }
}
