use ctxent_core::minimizer::extract_quantum_entropy;
use ctxent_core::prelude::*;
use ctxent_core::random::{haar_random_unitary, random_density};
use ctxent_core::reconstruct::Branch;

fn config(n: usize, seed: u64) -> ReconstructionConfig {
    let mut cfg = ReconstructionConfig::for_dim(n);
    cfg.seed = seed;
    cfg.minimizer.seed = seed;
    cfg
}

fn unique(rho: &DensityMatrix, seed: u64) -> (DensityMatrix, Option<Branch>) {
    let res = reconstruct(&StateOracle::new(rho.clone(), EntropyKind::Shannon), rho.dim(), &config(rho.dim(), seed)).unwrap();
    match res.outcome {
        Outcome::Unique(r) => (r, res.branch),
        other => panic!("expected a unique state, got {other:?}"),
    }
}

#[test]
fn reconstruction_commutes_with_conjugation() {
    for (n, seed) in [(3, 1u64), (4, 2), (5, 3)] {
        let rho = random_density(n, 2, seed).unwrap();
        let u = haar_random_unitary(n, seed + 10).unwrap();
        let moved = rho.conjugated_by(&u);
        let (got, _) = unique(&moved, seed);
        assert!(got.trace_distance(&moved).unwrap() <= 1e-6);
    }
}

#[test]
fn spectrum_below_one_half_takes_the_sum_one_branch() {
    let rho = DensityMatrix::from_diagonal(&[0.45, 0.35, 0.2], &Tolerances::default()).unwrap();
    let (got, branch) = unique(&rho, 0);
    assert_eq!(branch, Some(Branch::SumOne));
    assert!(got.trace_distance(&rho).unwrap() <= 1e-6);
}

#[test]
fn embedded_rank_two_state_needs_the_tie_break() {
    let rho = DensityMatrix::from_diagonal(&[0.2, 0.8, 0.0, 0.0], &Tolerances::default()).unwrap();
    let (got, branch) = unique(&rho, 7);
    assert_eq!(branch, Some(Branch::TieBreak));
    assert!(got.trace_distance(&rho).unwrap() <= 1e-6);
}

#[test]
fn extraction_examples() {
    let tol = Tolerances::default();
    let cfg = |n| MinimizerConfig { restarts: 6, ..MinimizerConfig::for_dim(n) };

    let half = DensityMatrix::from_diagonal(&[0.5, 0.5, 0.0], &tol).unwrap();
    let v = extract_quantum_entropy(&half, EntropyKind::Shannon, &cfg(3)).unwrap().best_value;
    assert!((v - core::f64::consts::LN_2).abs() <= 1e-6);

    let rho = random_density(4, 4, 21).unwrap();
    let spectrum = rho.spectrum().to_vec();
    let r2 = -spectrum.iter().map(|l| l * l).sum::<f64>().ln();
    let v = extract_quantum_entropy(&rho, EntropyKind::renyi(2.0).unwrap(), &cfg(4)).unwrap().best_value;
    assert!((v - r2).abs() <= 1e-6, "{v} vs {r2}");

    let cheb = -spectrum[0].ln();
    let v = extract_quantum_entropy(&rho, EntropyKind::Chebyshev, &cfg(4)).unwrap().best_value;
    assert!((v - cheb).abs() <= 1e-6, "{v} vs {cheb}");
}

#[test]
fn extraction_is_invariant_under_conjugation() {
    let rho = random_density(4, 3, 5).unwrap();
    let moved = rho.conjugated_by(&haar_random_unitary(4, 6).unwrap());
    let cfg = MinimizerConfig { restarts: 6, ..MinimizerConfig::for_dim(4) };
    let a = extract_quantum_entropy(&rho, EntropyKind::Shannon, &cfg).unwrap().best_value;
    let b = extract_quantum_entropy(&moved, EntropyKind::Shannon, &cfg).unwrap().best_value;
    assert!((a - b).abs() <= 1e-6);
}

#[test]
fn pure_qubit_gives_a_pair_with_one_pure_member() {
    let rho = random_density(2, 1, 3).unwrap();
    let res = reconstruct(&StateOracle::new(rho.clone(), EntropyKind::Shannon), 2, &config(2, 0)).unwrap();
    let Outcome::AmbiguousPair(a, b) = res.outcome else { panic!("{:?}", res.outcome) };
    let d = a.trace_distance(&rho).unwrap().min(b.trace_distance(&rho).unwrap());
    assert!(d <= 1e-6);
}
