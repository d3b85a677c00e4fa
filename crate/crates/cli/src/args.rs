use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctxent_core::entropy::EntropyKind;
use ctxent_core::minimizer::MinimizerConfig;
use ctxent_core::reconstruct::ReconstructionConfig;
use ctxent_core::Tolerances;

fn parse_kind(s: &str) -> Result<EntropyKind, String> {
    s.parse().map_err(|e: ctxent_core::Error| e.to_string())
}

/// Contextual entropy of quantum states: evaluation, von Neumann extraction, reconstruction.
#[derive(Debug, Parser)]
#[command(name = "ctxent", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random density matrix of the given rank.
    Gen {
        #[arg(long)]
        dim: usize,
        /// Defaults to full rank.
        #[arg(long)]
        rank: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contextual entropy of a state at one context.
    Entropy {
        #[arg(long)]
        state: PathBuf,
        /// Context JSON; the computational basis is used when neither context flag is given.
        #[arg(long, conflicts_with = "maximal_from_unitary")]
        context: Option<PathBuf>,
        /// Unitary matrix JSON whose columns span the maximal context.
        #[arg(long)]
        maximal_from_unitary: Option<PathBuf>,
        #[arg(long, default_value = "shannon", value_parser = parse_kind)]
        kind: EntropyKind,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantum entropy as the minimum of the contextual entropy over maximal contexts.
    Vn {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value = "shannon", value_parser = parse_kind)]
        kind: EntropyKind,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        minimizer: MinimizerArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct a state from its contextual-entropy section.
    ///
    /// Exit code 0 for a unique state, 3 for an ambiguous pair, 4 if no state fits.
    Reconstruct {
        /// Back the oracle with this state.
        #[arg(long, required_unless_present = "section", conflicts_with = "section")]
        state: Option<PathBuf>,
        /// Replay a recorded section sample instead.
        #[arg(long)]
        section: Option<PathBuf>,
        /// Defaults to shannon, or to the kind stored in the section file.
        #[arg(long, value_parser = parse_kind)]
        kind: Option<EntropyKind>,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        minimizer: MinimizerArgs,
        #[command(flatten)]
        recon: ReconArgs,
        #[command(flatten)]
        tol: TolArgs,
        /// Write every oracle query of this run as a section sample.
        #[arg(long)]
        record_section: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run property batteries over random states and contexts.
    Props {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Trials per battery and seed.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Number of consecutive seeds, starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        battery: Vec<Battery>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-outcome entropy curves S(x, 1 − x) as CSV.
    Curves {
        /// Comma-separated kinds, e.g. `shannon` or `hartley,renyi:0.5,shannon,renyi:3`.
        #[arg(long, value_delimiter = ',', default_value = "shannon", value_parser = parse_kind)]
        kinds: Vec<EntropyKind>,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Battery {
    All,
    FiniteAdditivity,
    ContextIndependence,
    PartialTrace,
    Monotonicity,
    Recursion,
    Equivariance,
    Concavity,
    SplitAdditivity,
    SplitSubadditivity,
    WeakRecursivity,
    RenyiMonotonicity,
    Continuity,
    EntangledSearch,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    #[arg(long, env = "CTXENT_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct MinimizerArgs {
    /// Defaults to 8·n.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

impl MinimizerArgs {
    pub fn config(&self, n: usize, seed: u64) -> MinimizerConfig {
        let mut cfg = MinimizerConfig::for_dim(n);
        cfg.seed = seed;
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReconArgs {
    #[arg(long)]
    pub verify_contexts: Option<usize>,
    #[arg(long)]
    pub tol_zero: Option<f64>,
    #[arg(long)]
    pub tol_sum: Option<f64>,
    #[arg(long)]
    pub tie_tol: Option<f64>,
    #[arg(long)]
    pub verify_tol: Option<f64>,
}

impl ReconArgs {
    pub fn apply(&self, cfg: &mut ReconstructionConfig) {
        if let Some(v) = self.verify_contexts {
            cfg.verify_contexts = v;
        }
        let slots = [
            (self.tol_zero, &mut cfg.tol_zero),
            (self.tol_sum, &mut cfg.tol_sum),
            (self.tie_tol, &mut cfg.tie_tol),
            (self.verify_tol, &mut cfg.verify_tol),
        ];
        for (flag, slot) in slots {
            if let Some(v) = flag {
                *slot = v;
            }
        }
    }
}

/// Overrides of the numerical tolerances.
#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    #[arg(long)]
    pub tol_herm: Option<f64>,
    #[arg(long)]
    pub tol_psd: Option<f64>,
    #[arg(long)]
    pub tol_trace: Option<f64>,
    #[arg(long)]
    pub tol_prob: Option<f64>,
    #[arg(long)]
    pub tol_inv: Option<f64>,
}

impl TolArgs {
    pub fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        let slots = [
            (self.tol_herm, &mut t.herm),
            (self.tol_psd, &mut t.psd),
            (self.tol_trace, &mut t.trace),
            (self.tol_prob, &mut t.prob),
            (self.tol_inv, &mut t.inv),
        ];
        for (flag, slot) in slots {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        t
    }
}
