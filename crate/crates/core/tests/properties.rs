//! Property-based invariants over random states and partitions.

mod common;

use proptest::prelude::*;
use qetlab::cli::config::QetParams;
use qetlab::cli::experiments::build_qet_setup;
use qetlab::dynamics::qet::{cell_weights, state_from_shell, ShellPolicy};
use qetlab::sampler::{sample_uniform_state, SeededStream};
use qetlab::superposition::{branch_profile, entanglement_entropy, schmidt_decompose};
use qetlab::{distance_to_maximally_mixed, partial_trace, purity, HilbertDims, Subsystem};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reduced_state_is_a_density_matrix(n1 in 1usize..7, n2 in 1usize..7, seed in any::<u64>()) {
        let psi = common::random_state(n1, n2, seed, 0);
        let dims = HilbertDims::new(n1, n2).unwrap();
        let rho = partial_trace(&psi, dims, Subsystem::First).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.trace().im.abs() < 1e-12);
        for i in 0..n1 {
            for j in 0..n1 {
                prop_assert!((rho.get(i, j) - rho.get(j, i).conj()).norm() < 1e-14);
            }
        }
        let ev = rho.eigenvalues();
        prop_assert!(ev.iter().all(|&e| e > -1e-12));
        let p = purity(&rho);
        prop_assert!(p >= 1.0 / n1 as f64 - 1e-12 && p <= 1.0 + 1e-12);
        // ‖ρ − I/n‖_F² = tr ρ² − 1/n.
        let d = distance_to_maximally_mixed(&rho);
        prop_assert!((d * d - (p - 1.0 / n1 as f64)).abs() < 1e-12);
    }

    #[test]
    fn schmidt_invariants(n1 in 1usize..7, n2 in 1usize..7, seed in any::<u64>()) {
        let psi = common::random_state(n1, n2, seed, 1);
        let dims = HilbertDims::new(n1, n2).unwrap();
        let sd = schmidt_decompose(&psi, dims).unwrap();
        prop_assert!(sd.coefficients.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(sd.coefficients.iter().all(|&c| c >= 0.0));
        prop_assert!((sd.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let s = entanglement_entropy(&psi, dims).unwrap();
        prop_assert!(s >= -1e-12 && s <= (n1.min(n2) as f64).ln() + 1e-12);
        let ev1 = partial_trace(&psi, dims, Subsystem::First).unwrap().eigenvalues();
        let ev2 = partial_trace(&psi, dims, Subsystem::Second).unwrap().eigenvalues();
        let top1: Vec<f64> = ev1.iter().rev().take(n1.min(n2)).copied().collect();
        let top2: Vec<f64> = ev2.iter().rev().take(n1.min(n2)).copied().collect();
        for ((a, b), w) in top1.iter().zip(&top2).zip(sd.weights()) {
            prop_assert!((a - b).abs() < 1e-10);
            prop_assert!((a - w).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branch_weights_are_permutation_equivariant(seed in any::<u64>(), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let setup = build_qet_setup(&QetParams::default(), 0).unwrap();
        let part = &setup.partition;
        let a = sample_uniform_state(part.shell_dim(), SeededStream::new(seed, 0)).unwrap();
        let psi = state_from_shell(a.amplitudes(), part).unwrap();
        let base = branch_profile(&psi, part, 0.1, ShellPolicy::Strict).unwrap();
        prop_assert!((base.total_weight() - 1.0).abs() < 1e-8);
        prop_assert!(base.branch_count >= 1);
        let permuted = part.permuted(&perm).unwrap();
        let other = branch_profile(&psi, &permuted, 0.1, ShellPolicy::Strict).unwrap();
        for (k, &p) in perm.iter().enumerate() {
            prop_assert!((other.weights[k] - base.weights[p]).abs() < 1e-14);
            prop_assert_eq!(&other.labels[k], &base.labels[p]);
        }
        prop_assert_eq!(other.branch_count, base.branch_count);
        let direct = cell_weights(a.amplitudes(), part);
        for (x, y) in direct.iter().zip(&base.weights) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
