//! Time series of macro-cell weights against independent oracles.

use qetlab::cli::config::{InitialState, QetParams};
use qetlab::cli::experiments::{build_qet_setup, initial_shell_coeffs, run_qet};
use qetlab::dynamics::evolution::evolve;
use qetlab::dynamics::qet::{
    diagonal_ensemble, qet_time_series, state_from_shell, temporal_std, uniform_times, ShellPolicy,
};
use qetlab::{Execution, C64};

#[test]
fn series_matches_full_space_evolution() {
    let setup = build_qet_setup(&QetParams::default(), 3).unwrap();
    let part = &setup.partition;
    let coeffs = initial_shell_coeffs(part, InitialState::Random, 0, 3).unwrap();
    let psi0 = state_from_shell(&coeffs, part).unwrap();
    let times = uniform_times(250.0, 26).unwrap();
    let series = qet_time_series(&psi0, part, &times, ShellPolicy::Strict, Execution::Sequential).unwrap();
    let projectors: Vec<_> = (0..part.cells.len()).map(|nu| part.ambient_projector(nu)).collect();
    for (k, &t) in times.iter().enumerate() {
        let psi_t = evolve(&psi0, &setup.spectrum, t).unwrap();
        for (nu, p) in projectors.iter().enumerate() {
            let w = p.expectation(&psi_t).unwrap();
            assert!((w - series.weights[k][nu]).abs() < 1e-10, "t={t} cell {nu}");
        }
    }
}

/// `|time average − diagonal ensemble| ≤ Σ_{m≠n} 2|a_m a_n P_mn| / (|E_m − E_n| T)`
/// for the exact continuous average; the trapezoid rule adds a little.
#[test]
fn time_average_obeys_finite_time_bound() {
    let setup = build_qet_setup(&QetParams::default(), 0).unwrap();
    let part = &setup.partition;
    let coeffs = initial_shell_coeffs(part, InitialState::Random, 0, 0).unwrap();
    let psi0 = state_from_shell(&coeffs, part).unwrap();
    let e = &part.shell.energies;
    let diag = diagonal_ensemble(&coeffs, part);
    for t_max in [50.0, 500.0, 5000.0] {
        let n = (t_max * 4.0 * (e[e.len() - 1] - e[0]) / std::f64::consts::PI).ceil() as usize + 1;
        let series = qet_time_series(&psi0, part, &uniform_times(t_max, n).unwrap(), ShellPolicy::Strict, Execution::Parallel).unwrap();
        let avg = series.time_average();
        for (nu, cell) in part.cells.iter().enumerate() {
            let mut bound = 0.0;
            for m in 0..e.len() {
                for k in 0..e.len() {
                    if m != k {
                        bound += 2.0 * (coeffs[m] * coeffs[k]).norm() * cell.projector[(m, k)].norm() / ((e[m] - e[k]).abs() * t_max);
                    }
                }
            }
            assert!((avg[nu] - diag[nu]).abs() <= bound + 1e-6, "T={t_max} cell {nu}");
        }
    }
}

#[test]
fn temporal_spread_matches_analytic_sigma() {
    let setup = build_qet_setup(&QetParams::default(), 1).unwrap();
    let part = &setup.partition;
    let coeffs = initial_shell_coeffs(part, InitialState::Random, 0, 1).unwrap();
    let psi0 = state_from_shell(&coeffs, part).unwrap();
    // Irregular sampling over a long window approximates the infinite-time
    // ensemble without aliasing any gap frequency.
    let times: Vec<f64> = (0..20_000).map(|k| 1e5 * ((k as f64 * 0.618_033_988_749_895) % 1.0)).collect();
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    let series = qet_time_series(&psi0, part, &sorted, ShellPolicy::Strict, Execution::Parallel).unwrap();
    let sigma = temporal_std(&coeffs, part);
    let diag = diagonal_ensemble(&coeffs, part);
    for nu in 0..part.cells.len() {
        let w: Vec<f64> = series.weights.iter().map(|x| x[nu]).collect();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let std = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
        assert!((mean - diag[nu]).abs() < 0.1 * sigma[nu] + 1e-3, "cell {nu} mean");
        assert!((std / sigma[nu] - 1.0).abs() < 0.1, "cell {nu}: {std} vs {}", sigma[nu]);
    }
}

#[test]
fn localized_state_starts_in_its_cell() {
    for cell in 0..4 {
        let p = QetParams {
            initial: InitialState::Localized,
            initial_cell: cell,
            t_max: Some(10.0),
            n_times: Some(11),
            ..Default::default()
        };
        let run = run_qet(&p, 5, Execution::Sequential).unwrap();
        assert!((run.series.weights[0][cell] - 1.0).abs() < 1e-12);
        assert_eq!(run.branch_counts[0], 1);
    }
}

#[test]
fn shell_spectrum_is_nondegenerate_for_most_seeds() {
    let clean = (0..10)
        .filter(|&s| build_qet_setup(&QetParams::default(), s).unwrap().nondegeneracy.holds())
        .count();
    assert!(clean >= 8, "{clean} of 10");
}

#[test]
fn weights_sum_to_one_in_compressed_partition() {
    let setup = build_qet_setup(&QetParams::default(), 0).unwrap();
    let (algebra, completeness) = setup.partition.projector_defects();
    assert!(algebra < 1e-10 && completeness < 1e-10);
    let zero = C64::new(0.0, 0.0);
    let mut coeffs = vec![zero; setup.partition.shell_dim()];
    coeffs[3] = C64::new(1.0, 0.0);
    let w = qetlab::dynamics::qet::cell_weights(&coeffs, &setup.partition);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}
