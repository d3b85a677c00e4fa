//! Subcommand implementations.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use ctxent_core::context::Context;
use ctxent_core::entropy::{contextual_entropy, entropy, EntropyKind};
use ctxent_core::measure::{check_context_independence, check_finite_additivity, partial_trace_battery, probabilities, CheckReport};
use ctxent_core::minimizer::extract_quantum_entropy;
use ctxent_core::oracle::{EntropyOracle, SampleOracle, StateOracle};
use ctxent_core::props;
use ctxent_core::random::random_density;
use ctxent_core::reconstruct::{reconstruct, Outcome, ReconstructionConfig};
use ctxent_core::state::{DensityMatrix, Unitary};
use ctxent_core::Tolerances;
use serde::Serialize;
use serde_json::json;

use crate::args::{Battery, Cli, Command};
use crate::curves::write_curves;
use crate::formats::{read_json, write_atomic, write_json, ContextJson, MatrixJson, ReconstructionJson, ReportJson, SectionJson, MinimizerJson};
use crate::manifest::RunManifest;
use crate::record::RecordingOracle;
use crate::{exit, CliError};

/// Slack allowed on section values outside [0, ln n].
const SECTION_SLACK: f64 = 1e-9;

struct Run {
    command: &'static str,
    started: Instant,
    seed: Option<u64>,
    inputs: Vec<String>,
}

impl Run {
    fn new(command: &'static str, seed: Option<u64>, inputs: &[&Path]) -> Self {
        Self { command, started: Instant::now(), seed, inputs: inputs.iter().map(|p| p.display().to_string()).collect() }
    }

    /// Writes `value` to `out` (with its manifest) or prints it to stdout.
    fn emit<T: Serialize>(&self, out: Option<&Path>, value: &T, config: serde_json::Value, pass: Option<bool>, summary: String) -> Result<(), CliError> {
        match out {
            Some(path) => {
                write_json(path, value)?;
                self.manifest(path, config, pass, summary)?;
            }
            None => println!("{}", serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?),
        }
        Ok(())
    }

    fn manifest(&self, output: &Path, config: serde_json::Value, pass: Option<bool>, summary: String) -> Result<(), CliError> {
        RunManifest {
            command: self.command.to_string(),
            config,
            seed: self.seed,
            inputs: self.inputs.clone(),
            outputs: vec![output.display().to_string()],
            wall_time_s: self.started.elapsed().as_secs_f64(),
            pass,
            summary,
        }
        .write_next_to(output)?;
        Ok(())
    }
}

fn load_state(path: &Path, tol: &Tolerances) -> Result<DensityMatrix, CliError> {
    read_json::<MatrixJson>(path)?.to_state(tol)
}

pub fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Gen { dim, rank, seed, out } => gen(*dim, rank.unwrap_or(*dim), seed.seed, out.as_deref()),
        Command::Entropy { state, context, maximal_from_unitary, kind, tol, out } => {
            entropy_cmd(state, context.as_deref(), maximal_from_unitary.as_deref(), *kind, &tol.tolerances(), out.as_deref())
        }
        Command::Vn { state, kind, seed, minimizer, tol, out } => {
            let tol = tol.tolerances();
            let rho = load_state(state, &tol)?;
            let cfg = minimizer.config(rho.dim(), seed.seed);
            vn(state, &rho, *kind, &cfg, out.as_deref())
        }
        Command::Reconstruct { state, section, kind, seed, minimizer, recon, tol, record_section, out } => {
            let tol = tol.tolerances();
            let source = match (state, section) {
                (Some(p), _) => Source::State(p.clone(), load_state(p, &tol)?),
                (None, Some(p)) => Source::Section(p.clone(), read_json(p)?),
                (None, None) => return Err(CliError::Input("one of --state or --section is required".into())),
            };
            let kind = match (kind, &source) {
                (Some(k), _) => *k,
                (None, Source::Section(_, s)) => s.kind()?,
                (None, Source::State(..)) => EntropyKind::Shannon,
            };
            let n = source.dim();
            let mut cfg = ReconstructionConfig::for_dim(n);
            cfg.kind = kind;
            cfg.seed = seed.seed;
            cfg.minimizer = minimizer.config(n, seed.seed);
            cfg.tol = tol;
            recon.apply(&mut cfg);
            reconstruct_cmd(source, &cfg, record_section.as_deref(), out.as_deref())
        }
        Command::Props { dim, trials, seeds, seed, battery, out } => props_cmd(*dim, *trials, seed.seed, *seeds, battery, out.as_deref()),
        Command::Curves { kinds, points, out } => curves_cmd(kinds, *points, out.as_deref()),
    }
}

fn gen(dim: usize, rank: usize, seed: u64, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let run = Run::new("gen", Some(seed), &[]);
    let rho = random_density(dim, rank, seed)?;
    let config = json!({ "dim": dim, "rank": rank });
    run.emit(out, &MatrixJson::from_matrix(rho.matrix()), config, None, format!("{dim}x{dim} state of rank {rank}"))?;
    Ok(ExitCode::from(exit::OK))
}

#[derive(Serialize)]
struct EntropyJson {
    kind: String,
    value: f64,
    probabilities: Vec<f64>,
}

fn entropy_cmd(
    state: &Path,
    context: Option<&Path>,
    unitary: Option<&Path>,
    kind: EntropyKind,
    tol: &Tolerances,
    out: Option<&Path>,
) -> Result<ExitCode, CliError> {
    let mut inputs = vec![state];
    inputs.extend(context.iter().chain(unitary.iter()).copied());
    let run = Run::new("entropy", None, &inputs);
    let rho = load_state(state, tol)?;
    let ctx = match (context, unitary) {
        (Some(p), _) => read_json::<ContextJson>(p)?.to_context(tol)?,
        (None, Some(p)) => {
            let u = Unitary::new(read_json::<MatrixJson>(p)?.to_matrix()?, tol)?;
            Context::from_unitary_partition(&u, &(0..u.dim()).map(|j| vec![j]).collect::<Vec<_>>())?
        }
        (None, None) => Context::computational(rho.dim())?,
    };
    let value = contextual_entropy(&rho, &ctx, kind, tol)?;
    println!("{value}");
    if let Some(path) = out {
        let result = EntropyJson { kind: kind.to_string(), value, probabilities: probabilities(&rho, &ctx, tol)? };
        write_json(path, &result)?;
        run.manifest(path, json!({ "kind": kind.to_string(), "context_len": ctx.len() }), None, format!("{value}"))?;
    }
    Ok(ExitCode::from(exit::OK))
}

#[derive(Serialize)]
struct VnJson {
    kind: String,
    value: f64,
    /// The same entropy evaluated on the eigenvalues, for comparison.
    spectral_value: f64,
    minimizer: MinimizerJson,
}

fn vn(state: &Path, rho: &DensityMatrix, kind: EntropyKind, cfg: &ctxent_core::minimizer::MinimizerConfig, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let run = Run::new("vn", Some(cfg.seed), &[state]);
    let res = extract_quantum_entropy(rho, kind, cfg)?;
    println!("{}", res.best_value);
    if let Some(path) = out {
        let spectral_value = entropy(kind, rho.spectrum(), &Tolerances::default())?;
        let result = VnJson { kind: kind.to_string(), value: res.best_value, spectral_value, minimizer: MinimizerJson::from(&res) };
        write_json(path, &result)?;
        let config = json!({ "kind": kind.to_string(), "restarts": cfg.restarts, "max_iters": cfg.max_iters });
        run.manifest(path, config, Some(res.converged), format!("{} (spectral {spectral_value})", res.best_value))?;
    }
    Ok(ExitCode::from(exit::OK))
}

pub enum Source {
    State(PathBuf, DensityMatrix),
    Section(PathBuf, SectionJson),
}

impl Source {
    fn dim(&self) -> usize {
        match self {
            Source::State(_, rho) => rho.dim(),
            Source::Section(_, s) => s.dim,
        }
    }

    fn path(&self) -> &Path {
        match self {
            Source::State(p, _) | Source::Section(p, _) => p,
        }
    }
}

fn reconstruct_cmd(source: Source, cfg: &ReconstructionConfig, record: Option<&Path>, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let run = Run::new("reconstruct", Some(cfg.seed), &[source.path()]);
    let n = source.dim();
    let oracle: Box<dyn EntropyOracle> = match &source {
        Source::State(_, rho) => Box::new(StateOracle::new(rho.clone(), cfg.kind).with_tolerances(cfg.tol)),
        Source::Section(_, s) => Box::new(SampleOracle::new(&s.to_sample(&cfg.tol, SECTION_SLACK)?)),
    };
    let recorder = RecordingOracle::new(oracle);
    let result = reconstruct(&recorder, n, cfg).map_err(|e| match e {
        ctxent_core::Error::UnknownContext => CliError::Input(
            "the section sample has no value for a queried context; replay with the flags used when recording".into(),
        ),
        other => CliError::from(other),
    })?;
    if let Some(path) = record {
        write_json(path, &SectionJson::from_sample(&recorder.into_sample(), cfg.kind))?;
    }
    let generating = match &source {
        Source::State(_, rho) => Some(rho),
        Source::Section(..) => None,
    };
    let report = ReconstructionJson::new(&result, generating)?;
    let code = match result.outcome {
        Outcome::Unique(_) => exit::OK,
        Outcome::AmbiguousPair(..) => exit::AMBIGUOUS,
        Outcome::Infeasible(_) => exit::INFEASIBLE,
    };
    let config = json!({
        "dim": n,
        "kind": cfg.kind.to_string(),
        "restarts": cfg.minimizer.restarts,
        "max_iters": cfg.minimizer.max_iters,
        "tol_zero": cfg.tol_zero,
        "tol_sum": cfg.tol_sum,
        "tie_tol": cfg.tie_tol,
        "verify_contexts": cfg.verify_contexts,
        "verify_tol": cfg.verify_tol,
    });
    let summary = match (&report.reason, report.trace_distance) {
        (Some(r), _) => format!("infeasible: {}", r.name),
        (None, Some(d)) => format!("{} (trace distance {d:e})", report.outcome),
        (None, None) => report.outcome.clone(),
    };
    if out.is_some() {
        eprintln!("{summary}");
    }
    run.emit(out, &report, config, Some(code != exit::INFEASIBLE), summary)?;
    Ok(ExitCode::from(code))
}

#[derive(Serialize)]
struct WitnessJson {
    ranks: Vec<usize>,
    entangled: f64,
    product: f64,
    context: ContextJson,
}

#[derive(Serialize)]
struct PropsJson {
    dim: usize,
    trials: usize,
    seeds: Vec<u64>,
    reports: Vec<ReportJson>,
    bell_witness: Option<WitnessJson>,
}

fn props_cmd(n: usize, trials: usize, seed: u64, seeds: u64, which: &[Battery], out: Option<&Path>) -> Result<ExitCode, CliError> {
    if n < 2 {
        return Err(CliError::Input("--dim must be at least 2".into()));
    }
    let run = Run::new("props", Some(seed), &[]);
    let selected = |b: Battery| which.contains(&Battery::All) || which.contains(&b);
    let tol = Tolerances::default();
    let shannon = EntropyKind::Shannon;
    let mut merged: BTreeMap<&'static str, CheckReport> = BTreeMap::new();
    let mut witness = None;
    let seed_list: Vec<u64> = (0..seeds).map(|k| seed.wrapping_add(k)).collect();
    for &s in &seed_list {
        let mut reports = Vec::new();
        let rho = random_density(n, n, s)?;
        let composite = random_density(2 * n, 2 * n, s)?;
        if selected(Battery::FiniteAdditivity) {
            reports.push(check_finite_additivity(&rho, trials, s));
        }
        if selected(Battery::ContextIndependence) {
            reports.push(check_context_independence(&rho, trials, s, &tol)?);
        }
        if selected(Battery::PartialTrace) {
            reports.push(partial_trace_battery(&composite, 2, n, trials, s, &tol)?);
        }
        if selected(Battery::Monotonicity) {
            reports.push(props::monotonicity(n, shannon, trials, s)?);
        }
        if selected(Battery::Recursion) {
            reports.push(props::recursion(n, trials, s)?);
        }
        if selected(Battery::Equivariance) {
            reports.push(props::equivariance(n, shannon, trials, s)?);
        }
        if selected(Battery::Concavity) {
            reports.push(props::concavity(n, shannon, trials, s)?);
        }
        if selected(Battery::SplitAdditivity) {
            reports.push(props::split_additivity(2, n, shannon, trials, s)?);
        }
        if selected(Battery::SplitSubadditivity) {
            reports.push(props::split_subadditivity(2, n, trials, s)?);
        }
        if selected(Battery::WeakRecursivity) {
            reports.push(props::weak_recursivity(shannon, n, trials, s)?);
        }
        if selected(Battery::RenyiMonotonicity) {
            reports.push(props::renyi_order_monotonicity(n, trials, s)?);
        }
        if selected(Battery::Continuity) {
            reports.push(props::continuity(n, shannon, trials, s)?);
        }
        if selected(Battery::EntangledSearch) {
            let search = props::entangled_counterexample(&props::bell_state(), 2, 2, trials, s)?;
            if witness.is_none() {
                witness = search.witness.map(|w| WitnessJson {
                    ranks: w.context.ranks(),
                    entangled: w.entangled,
                    product: w.product,
                    context: ContextJson::from_context(&w.context),
                });
            }
            reports.push(search.report);
        }
        for r in reports {
            merged
                .entry(r.check)
                .and_modify(|m| {
                    // the counterexample search passes if any seed finds a witness
                    m.pass = if r.check == "entangled_counterexample" { m.pass || r.pass } else { m.pass && r.pass };
                    m.max_residual = m.max_residual.max(r.max_residual);
                    m.trials += r.trials;
                })
                .or_insert(r);
        }
    }
    let reports: Vec<ReportJson> = merged.values().map(ReportJson::from).collect();
    let all_pass = reports.iter().all(|r| r.pass);
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
    let summary = if all_pass { format!("{} checks passed", reports.len()) } else { format!("failed: {}", failed.join(", ")) };
    let result = PropsJson { dim: n, trials, seeds: seed_list, reports, bell_witness: witness };
    let config = json!({ "dim": n, "trials": trials, "seeds": seeds, "batteries": which.iter().map(|b| format!("{b:?}")).collect::<Vec<_>>() });
    run.emit(out, &result, config, Some(all_pass), summary)?;
    Ok(ExitCode::from(if all_pass { exit::OK } else { exit::CHECK_FAILED }))
}

fn curves_cmd(kinds: &[EntropyKind], points: usize, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let run = Run::new("curves", None, &[]);
    let mut buf = Vec::new();
    write_curves(kinds, points, &mut buf)?;
    match out {
        Some(path) => {
            write_atomic(path, &buf)?;
            let config = json!({ "kinds": kinds.iter().map(|k| k.to_string()).collect::<Vec<_>>(), "points": points });
            run.manifest(path, config, None, format!("{} curves x {points} points", kinds.len()))?;
        }
        None => std::io::stdout().write_all(&buf).map_err(|e| CliError::io(Path::new("<stdout>"), e))?,
    }
    Ok(ExitCode::from(exit::OK))
}
