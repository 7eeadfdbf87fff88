//! Experiment runners. Each `run_*` function computes the in-memory result;
//! each `write_*` function turns it into report files and a summary.

use std::path::Path;

use nalgebra::DVector;

use crate::cli::config::{ConcentrationParams, InitialState, MeasureParams, QetParams, SchmidtParams, MAX_TIMES};
use crate::cli::report::{ensure_dir, fmt_f64, write_csv, Check, Summary};
use crate::concentration::{run_concentration_experiment, ConcentrationReport, LevyBoundParams, DeviationKind};
use crate::dynamics::ball_gas::BallGasModel;
use crate::dynamics::evolution::{check_nondegeneracy, NondegeneracyReport};
use crate::dynamics::qet::{
    check_qet_condition, diagonal_ensemble, ergodic_fraction, min_occupied_gap, qet_time_series, state_from_shell,
    temporal_std, uniform_times, CellCondition, QetTimeSeries, ShellPolicy,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hilbert::{partial_trace, HilbertDims, StateVector, Subsystem};
use crate::macroscopic::{build_macro_partition, energy_shell, BandSpec, MacroPartition};
use crate::sampler::{sample_bipartite_state, sample_uniform_state, SeededStream};
use crate::spectral::SpectralDecomposition;
use crate::superposition::{
    apply_controlled_rotation, default_threshold, pointer_measure, schmidt_decompose, PointerModel, PointerOutcome,
};
use crate::C64;

/// Level and gap coincidence tolerance for the shell spectrum.
pub const NONDEGENERACY_TOL: f64 = 1e-9;
/// Stream id of the initial state (the model perturbation uses its own).
pub const INITIAL_STATE_STREAM: u64 = 1;
/// Populations below this do not count as occupied levels.
pub const OCCUPIED_TOL: f64 = 1e-12;
/// `T · (smallest occupied gap)` at which the long-time average is compared
/// with the diagonal ensemble.
pub const LONG_TIME_FACTOR: f64 = 100.0;
/// Agreement required between the long-time average and the diagonal
/// ensemble.
pub const TIME_AVERAGE_TOL: f64 = 1e-3;

fn int(x: usize) -> toml::Value {
    toml::Value::Integer(x as i64)
}

fn floats(xs: &[f64]) -> toml::Value {
    toml::Value::Array(xs.iter().map(|&x| toml::Value::Float(x)).collect())
}

// ---------------------------------------------------------------------------
// concentration

pub fn run_concentration(p: &ConcentrationParams, seed: u64, exec: Execution) -> Result<ConcentrationReport> {
    p.validate()?;
    run_concentration_experiment(p.n1, p.n2, p.trials, &p.epsilons, seed, exec)
}

pub fn write_concentration(
    dir: &Path,
    p: &ConcentrationParams,
    seed: u64,
    report: &ConcentrationReport,
) -> Result<Summary<ConcentrationParams>> {
    ensure_dir(dir)?;
    write_csv(
        &dir.join("concentration.csv"),
        &["kind", "epsilon", "empirical", "bound", "stderr", "bound_applies", "trials", "n1", "n2", "seed"],
        report.rows.iter().map(|r| {
            vec![
                r.kind.as_str().to_string(),
                fmt_f64(r.epsilon),
                fmt_f64(r.empirical),
                fmt_f64(r.bound),
                fmt_f64(r.stderr),
                r.bound_applies.to_string(),
                report.trials.to_string(),
                report.n1.to_string(),
                report.n2.to_string(),
                seed.to_string(),
            ]
        }),
    )?;
    let n1 = report.n1;
    write_csv(
        &dir.join("mean_rho.csv"),
        &["row", "col", "re", "im"],
        (0..n1).flat_map(|i| {
            (0..n1).map(move |j| {
                let z = report.mean_rho[(i, j)];
                vec![i.to_string(), j.to_string(), fmt_f64(z.re), fmt_f64(z.im)]
            })
        }),
    )?;

    let mut s = Summary::new("concentration", seed, p.clone());
    s.metric("mean_distance", report.mean_distance);
    s.metric("max_deviation", report.max_deviation);
    s.metric("worst_ratio", report.worst_ratio());
    for kind in DeviationKind::ALL {
        if let Ok(lp) = LevyBoundParams::new(p.n1, p.n2, 1.0, kind.lipschitz_norm()) {
            s.metric(&format!("delta_{}", kind.as_str()), lp.delta);
        }
    }
    let excess = report
        .rows
        .iter()
        .map(|r| r.empirical - r.bound - 3.0 * r.stderr)
        .fold(f64::NEG_INFINITY, f64::max);
    s.checks.push(Check::at_most("exceedance_within_bound_3sigma", excess, 0.0));
    if p.n1 * p.n2 >= 256 {
        s.checks.push(Check::at_most("mean_rho_distance", report.mean_distance, 0.02));
    }
    s.write(dir)?;
    Ok(s)
}

// ---------------------------------------------------------------------------
// qet

/// Model, shell and partition for a ball-gas QET run.
#[derive(Debug, Clone)]
pub struct QetSetup {
    pub model: BallGasModel,
    pub spectrum: SpectralDecomposition,
    pub partition: MacroPartition,
    pub nondegeneracy: NondegeneracyReport,
}

pub fn build_qet_setup(p: &QetParams, seed: u64) -> Result<QetSetup> {
    p.validate()?;
    let model = BallGasModel::new(p.model_config(seed))?;
    let spectrum = SpectralDecomposition::of(model.hamiltonian());
    let shell = energy_shell(&spectrum, p.shell_lo, p.shell_hi)?;
    let edges = model.position_bin_edges(p.cells)?;
    let partition = build_macro_partition(&shell, &model.ball_position(), &BandSpec::Edges(edges))?;
    let nondegeneracy = check_nondegeneracy(&partition.shell.energies, NONDEGENERACY_TOL);
    Ok(QetSetup {
        model,
        spectrum,
        partition,
        nondegeneracy,
    })
}

/// Shell coefficients of the initial state: uniformly random in the shell,
/// or uniformly random inside cell `cell`.
pub fn initial_shell_coeffs(partition: &MacroPartition, initial: InitialState, cell: usize, seed: u64) -> Result<Vec<C64>> {
    let stream = SeededStream::new(seed, INITIAL_STATE_STREAM);
    match initial {
        InitialState::Random => Ok(sample_uniform_state(partition.shell_dim(), stream)?.into_amplitudes()),
        InitialState::Localized => {
            let c = partition.cells.get(cell).ok_or(Error::IndexOutOfRange {
                name: "cell",
                index: cell,
                bound: partition.cells.len(),
            })?;
            let g = sample_uniform_state(c.dim(), stream)?;
            let a = &c.basis * DVector::from_column_slice(g.amplitudes());
            Ok(a.iter().copied().collect())
        }
    }
}

#[derive(Debug, Clone)]
pub struct QetRun {
    pub setup: QetSetup,
    pub coeffs: Vec<C64>,
    pub min_gap: f64,
    pub t_max: f64,
    pub series: QetTimeSeries,
    pub time_average: Vec<f64>,
    pub diagonal: Vec<f64>,
    pub sigma: Vec<f64>,
    pub epsilon: f64,
    pub ergodic_fraction: f64,
    pub threshold: f64,
    pub branch_counts: Vec<usize>,
    /// Fraction of samples with `t > t_max/10` showing two or more branches.
    pub late_superposition_fraction: f64,
    pub condition: Vec<CellCondition>,
}

impl QetRun {
    pub fn time_average_error(&self) -> f64 {
        self.time_average
            .iter()
            .zip(&self.diagonal)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Whether `t_max` is long enough for the time-average comparison.
    pub fn is_long_time(&self) -> bool {
        self.t_max * self.min_gap >= LONG_TIME_FACTOR * (1.0 - 1e-12)
    }
}

/// Number of samples resolving the fastest frequency `bandwidth` on
/// `[0, t_max]` with at least four samples per period.
pub fn auto_time_count(t_max: f64, bandwidth: f64) -> Result<usize> {
    let dt = std::f64::consts::PI / (2.0 * bandwidth.max(f64::MIN_POSITIVE));
    let n = (t_max / dt).ceil() + 1.0;
    if !(n <= MAX_TIMES as f64) {
        return Err(Error::Config {
            field: "qet.n_times".into(),
            reason: format!("automatic grid needs {n} samples (limit {MAX_TIMES}); set t_max or n_times"),
        });
    }
    Ok((n as usize).max(2))
}

pub fn run_qet(p: &QetParams, seed: u64, exec: Execution) -> Result<QetRun> {
    let setup = build_qet_setup(p, seed)?;
    let partition = &setup.partition;
    let coeffs = initial_shell_coeffs(partition, p.initial, p.initial_cell, seed)?;
    let energies = &partition.shell.energies;
    let min_gap = min_occupied_gap(energies, &coeffs, OCCUPIED_TOL).unwrap_or(f64::INFINITY);
    let t_max = match p.t_max {
        Some(t) => t,
        None if min_gap.is_finite() => LONG_TIME_FACTOR / min_gap,
        None => {
            return Err(Error::Config {
                field: "qet.t_max".into(),
                reason: "initial state occupies a single level; set t_max explicitly".into(),
            })
        }
    };
    let occupied: Vec<f64> = energies
        .iter()
        .zip(&coeffs)
        .filter(|(_, c)| c.norm_sqr() > OCCUPIED_TOL)
        .map(|(e, _)| *e)
        .collect();
    let bandwidth = occupied.last().unwrap_or(&0.0) - occupied.first().unwrap_or(&0.0);
    let n_times = match p.n_times {
        Some(n) => n,
        None => auto_time_count(t_max, bandwidth)?,
    };
    let times = uniform_times(t_max, n_times)?;
    let psi0 = state_from_shell(&coeffs, partition)?;
    let series = qet_time_series(&psi0, partition, &times, ShellPolicy::Strict, exec)?;

    let time_average = series.time_average();
    let diagonal = diagonal_ensemble(&coeffs, partition);
    let sigma = temporal_std(&coeffs, partition);
    let epsilon = p
        .epsilon
        .unwrap_or_else(|| 2.0 * sigma.iter().copied().fold(0.0, f64::max));
    let ergodic_fraction = ergodic_fraction(&series, epsilon)?;
    let threshold = p.threshold.unwrap_or_else(|| default_threshold(partition));
    let profiles = series.branch_profiles(threshold)?;
    let branch_counts: Vec<usize> = profiles.iter().map(|b| b.branch_count).collect();
    let late: Vec<usize> = (0..times.len()).filter(|&k| times[k] > t_max / 10.0).collect();
    let late_superposition_fraction =
        late.iter().filter(|&&k| branch_counts[k] >= 2).count() as f64 / late.len().max(1) as f64;
    let condition = check_qet_condition(partition);
    Ok(QetRun {
        setup,
        coeffs,
        min_gap,
        t_max,
        series,
        time_average,
        diagonal,
        sigma,
        epsilon,
        ergodic_fraction,
        threshold,
        branch_counts,
        late_superposition_fraction,
        condition,
    })
}

pub fn write_qet(dir: &Path, p: &QetParams, seed: u64, run: &QetRun) -> Result<Summary<QetParams>> {
    ensure_dir(dir)?;
    let partition = &run.setup.partition;
    let labels = partition.labels();
    let mut header = vec!["t".to_string()];
    header.extend(labels.iter().map(|l| format!("weight_{l}")));
    header.push("branch_count".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        &dir.join("qet_weights.csv"),
        &header_refs,
        run.series.times.iter().enumerate().map(|(k, &t)| {
            let mut row = vec![fmt_f64(t)];
            row.extend(run.series.weights[k].iter().map(|&w| fmt_f64(w)));
            row.push(run.branch_counts[k].to_string());
            row
        }),
    )?;
    let dims = partition.dims();
    let targets = partition.targets();
    write_csv(
        &dir.join("qet_cells.csv"),
        &[
            "cell",
            "dim",
            "target",
            "time_average",
            "diagonal_ensemble",
            "sigma",
            "max_diagonal_deviation",
            "max_off_diagonal",
        ],
        (0..labels.len()).map(|nu| {
            vec![
                labels[nu].clone(),
                dims[nu].to_string(),
                fmt_f64(targets[nu]),
                fmt_f64(run.time_average[nu]),
                fmt_f64(run.diagonal[nu]),
                fmt_f64(run.sigma[nu]),
                fmt_f64(run.condition[nu].max_diagonal_deviation),
                fmt_f64(run.condition[nu].max_off_diagonal),
            ]
        }),
    )?;
    let shell = &partition.shell;
    write_csv(
        &dir.join("qet_spectrum.csv"),
        &["level", "energy", "population"],
        (0..shell.dim()).map(|n| {
            vec![
                shell.indices[n].to_string(),
                fmt_f64(shell.energies[n]),
                fmt_f64(run.coeffs[n].norm_sqr()),
            ]
        }),
    )?;

    let mut s = Summary::new("qet", seed, p.clone());
    s.metric("hilbert_dim", int(run.setup.model.dim()));
    s.metric("shell_dim", int(partition.shell_dim()));
    s.metric(
        "cell_dims",
        toml::Value::Array(dims.iter().map(|&d| int(d)).collect()),
    );
    s.metric("compressed_observable", partition.mode == crate::macroscopic::CompressionMode::Compressed);
    s.metric("nondegenerate", run.setup.nondegeneracy.holds());
    s.metric("min_level_spacing", run.setup.nondegeneracy.min_level_spacing);
    s.metric("min_gap_difference", run.setup.nondegeneracy.min_gap_difference);
    s.metric("min_occupied_gap", run.min_gap);
    s.metric("t_max", run.t_max);
    s.metric("n_times", int(run.series.len()));
    s.metric("leakage", run.series.leakage);
    s.metric("time_average", floats(&run.time_average));
    s.metric("diagonal_ensemble", floats(&run.diagonal));
    s.metric("sigma", floats(&run.sigma));
    s.metric("epsilon", run.epsilon);
    s.metric("ergodic_fraction", run.ergodic_fraction);
    s.metric("threshold", run.threshold);
    let counts = &run.branch_counts;
    s.metric("branch_count_min", int(*counts.iter().min().unwrap_or(&0)));
    s.metric("branch_count_max", int(*counts.iter().max().unwrap_or(&0)));
    s.metric(
        "branch_count_mean",
        counts.iter().sum::<usize>() as f64 / counts.len().max(1) as f64,
    );
    s.metric("late_superposition_fraction", run.late_superposition_fraction);
    s.metric(
        "max_diagonal_deviation",
        run.condition.iter().map(|c| c.max_diagonal_deviation).fold(0.0, f64::max),
    );
    s.metric(
        "max_off_diagonal",
        run.condition.iter().map(|c| c.max_off_diagonal).fold(0.0, f64::max),
    );
    if !partition.warnings.is_empty() {
        s.metric(
            "warnings",
            toml::Value::Array(partition.warnings.iter().cloned().map(toml::Value::String).collect()),
        );
    }
    s.checks.push(Check::at_most("weight_completeness", run.series.completeness_defect(), 1e-8));
    if run.is_long_time() {
        s.checks.push(Check::at_most("time_average_vs_diagonal_ensemble", run.time_average_error(), TIME_AVERAGE_TOL));
    }
    s.write(dir)?;
    Ok(s)
}

// ---------------------------------------------------------------------------
// measure

/// Spin counts at which the log-overlap slope is measured.
pub const SLOPE_SPINS: [usize; 3] = [10, 20, 40];
/// Largest spin count for which the dense unitary checks run.
pub const DENSE_CHECK_SPINS: usize = 10;

#[derive(Debug, Clone)]
pub struct MeasureRun {
    pub outcome: PointerOutcome,
    /// `(N, closed form, constructed)` for `N = 1..=n_spins`.
    pub curve: Vec<(usize, f64, f64)>,
    /// Least-squares slope of `ln overlap` against `N` over [`SLOPE_SPINS`];
    /// `None` when the overlap vanishes.
    pub log_slope: Option<f64>,
    pub norm_defect: f64,
    /// Dense norm and linearity defects, for small `N`.
    pub dense_defects: Option<(f64, f64)>,
}

pub fn log_overlap_slope(theta: f64, c_plus: C64, c_minus: C64) -> Result<Option<f64>> {
    // A perfect pointer leaves only rounding noise in the overlap.
    if theta.cos().abs() < 1e-12 {
        return Ok(None);
    }
    let mut pts = Vec::new();
    for n in SLOPE_SPINS {
        let o = pointer_measure(&PointerModel::new(n, theta, c_plus, c_minus)?).branch_overlap;
        if !(o > 0.0) {
            return Ok(None);
        }
        pts.push((n as f64, o.ln()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(Some(sxy / sxx))
}

/// Norm preservation and linearity of the controlled rotation on dense
/// vectors: `U(c₊|+⟩ + c₋|−⟩)|0…0⟩` against `c₊U|+⟩|0…0⟩ + c₋U|−⟩|0…0⟩`.
pub fn dense_pointer_defects(model: &PointerModel) -> Result<(f64, f64)> {
    let n = model.n_spins;
    let half = 1usize << n;
    let zero = C64::new(0.0, 0.0);
    let mut plus = vec![zero; 2 * half];
    plus[0] = C64::new(1.0, 0.0);
    let mut minus = vec![zero; 2 * half];
    minus[half] = C64::new(1.0, 0.0);
    let mut both = vec![zero; 2 * half];
    both[0] = model.c_plus;
    both[half] = model.c_minus;
    let u_plus = apply_controlled_rotation(model.theta, n, &plus)?;
    let u_minus = apply_controlled_rotation(model.theta, n, &minus)?;
    let u_both = apply_controlled_rotation(model.theta, n, &both)?;
    let norm = (u_both.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs();
    let linearity = u_both
        .iter()
        .zip(u_plus.iter().zip(&u_minus))
        .map(|(z, (a, b))| (z - (model.c_plus * a + model.c_minus * b)).norm())
        .fold(0.0, f64::max);
    let dense = pointer_measure(model).state.to_dense()?;
    let structural = u_both.iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok((norm, linearity.max(structural)))
}

pub fn run_measure(p: &MeasureParams) -> Result<MeasureRun> {
    p.validate()?;
    let (c_plus, c_minus) = p.amplitudes()?;
    let model = PointerModel::new(p.n_spins, p.theta, c_plus, c_minus)?;
    let outcome = pointer_measure(&model);
    let curve = (1..=p.n_spins)
        .map(|n| {
            let o = pointer_measure(&PointerModel { n_spins: n, ..model });
            (n, o.closed_form, o.branch_overlap)
        })
        .collect();
    let dense_defects = if p.n_spins <= DENSE_CHECK_SPINS {
        Some(dense_pointer_defects(&model)?)
    } else {
        None
    };
    Ok(MeasureRun {
        norm_defect: (outcome.state.norm_sqr() - 1.0).abs(),
        outcome,
        curve,
        log_slope: log_overlap_slope(p.theta, c_plus, c_minus)?,
        dense_defects,
    })
}

pub fn write_measure(dir: &Path, p: &MeasureParams, seed: u64, run: &MeasureRun) -> Result<Summary<MeasureParams>> {
    ensure_dir(dir)?;
    write_csv(
        &dir.join("overlap_curve.csv"),
        &["n_spins", "overlap_closed_form", "overlap_constructed", "log_overlap"],
        run.curve.iter().map(|&(n, closed, built)| {
            vec![n.to_string(), fmt_f64(closed), fmt_f64(built), fmt_f64(built.ln())]
        }),
    )?;
    let mut s = Summary::new("measure", seed, p.clone());
    s.metric("overlap", run.outcome.branch_overlap);
    s.metric("overlap_closed_form", run.outcome.closed_form);
    s.metric("rate", -p.theta.cos().abs().ln());
    if let Some(slope) = run.log_slope {
        s.metric("log_overlap_slope", slope);
    }
    let curve_err = run
        .curve
        .iter()
        .map(|&(_, a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    s.checks.push(Check::at_most("overlap_closed_form_match", curve_err, 1e-12));
    s.checks.push(Check::at_most("norm_preserved", run.norm_defect, 1e-12));
    if let Some(slope) = run.log_slope {
        s.checks.push(Check::at_most("log_slope", (slope - p.theta.cos().abs().ln()).abs(), 1e-9));
    }
    if let Some((norm, lin)) = run.dense_defects {
        s.checks.push(Check::at_most("dense_norm_preserved", norm, 1e-12));
        s.checks.push(Check::at_most("dense_linearity", lin, 1e-12));
    }
    s.write(dir)?;
    Ok(s)
}

// ---------------------------------------------------------------------------
// schmidt

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtTrial {
    pub coefficients: Vec<f64>,
    /// Spectrum of `ρ₁`, descending.
    pub rho_spectrum: Vec<f64>,
    pub entropy: f64,
    pub spectrum_deviation: f64,
    pub reconstruction_error: f64,
}

pub fn schmidt_trial(state: &StateVector, dims: HilbertDims) -> Result<SchmidtTrial> {
    let sd = schmidt_decompose(state, dims)?;
    let mut rho_spectrum = partial_trace(state, dims, Subsystem::First)?.eigenvalues();
    rho_spectrum.reverse();
    let weights = sd.weights();
    let spectrum_deviation = (0..rho_spectrum.len().max(weights.len()))
        .map(|k| (weights.get(k).copied().unwrap_or(0.0) - rho_spectrum.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    let reconstruction_error = sd
        .reconstruct()
        .iter()
        .zip(state.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(SchmidtTrial {
        entropy: sd.entropy(),
        coefficients: sd.coefficients,
        rho_spectrum,
        spectrum_deviation,
        reconstruction_error,
    })
}

/// Mean entanglement entropy of random states on `m ⊗ n`, `m ≤ n`:
/// `Σ_{k=n+1}^{mn} 1/k − (m−1)/(2n)`.
pub fn page_entropy(n1: usize, n2: usize) -> f64 {
    let (m, n) = (n1.min(n2), n1.max(n2));
    ((n + 1)..=(m * n)).map(|k| 1.0 / k as f64).sum::<f64>() - (m as f64 - 1.0) / (2.0 * n as f64)
}

pub fn run_schmidt(p: &SchmidtParams, seed: u64, exec: Execution) -> Result<Vec<SchmidtTrial>> {
    p.validate()?;
    let dims = HilbertDims::new(p.n1, p.n2)?;
    exec.map_indexed(p.trials, |i| {
        let psi = sample_bipartite_state(dims, SeededStream::new(seed, i as u64));
        schmidt_trial(&psi, dims)
    })
    .into_iter()
    .collect()
}

pub fn write_schmidt(dir: &Path, p: &SchmidtParams, seed: u64, trials: &[SchmidtTrial]) -> Result<Summary<SchmidtParams>> {
    ensure_dir(dir)?;
    write_csv(
        &dir.join("schmidt.csv"),
        &["trial", "k", "coefficient", "weight", "rho1_eigenvalue"],
        trials.iter().enumerate().flat_map(|(i, t)| {
            (0..t.rho_spectrum.len().max(t.coefficients.len())).map(move |k| {
                let c = t.coefficients.get(k).copied().unwrap_or(0.0);
                vec![
                    i.to_string(),
                    k.to_string(),
                    fmt_f64(c),
                    fmt_f64(c * c),
                    fmt_f64(t.rho_spectrum.get(k).copied().unwrap_or(0.0)),
                ]
            })
        }),
    )?;
    write_csv(
        &dir.join("entropy.csv"),
        &["trial", "entropy", "spectrum_deviation", "reconstruction_error"],
        trials.iter().enumerate().map(|(i, t)| {
            vec![
                i.to_string(),
                fmt_f64(t.entropy),
                fmt_f64(t.spectrum_deviation),
                fmt_f64(t.reconstruction_error),
            ]
        }),
    )?;
    let mut s = Summary::new("schmidt", seed, p.clone());
    let mean_entropy = trials.iter().map(|t| t.entropy).sum::<f64>() / trials.len() as f64;
    let max_dev = trials.iter().map(|t| t.spectrum_deviation).fold(0.0, f64::max);
    let max_rec = trials.iter().map(|t| t.reconstruction_error).fold(0.0, f64::max);
    s.metric("mean_entropy", mean_entropy);
    s.metric("page_entropy", page_entropy(p.n1, p.n2));
    s.metric("max_entropy", (p.n1.min(p.n2) as f64).ln());
    s.checks.push(Check::at_most("schmidt_vs_rho1_spectrum", max_dev, 1e-10));
    s.checks.push(Check::at_most("reconstruction", max_rec, 1e-10));
    s.write(dir)?;
    Ok(s)
}
