//! Macro-cell weights `⟨Ψ(t)|P_ν|Ψ(t)⟩` along exact unitary evolution and the
//! statistics that compare them with the typical values `d_ν / D`.
//!
//! Inside an energy shell the evolution is diagonal: with shell coefficients
//! `a_n = ⟨φ_n|Ψ₀⟩`, `a_n(t) = e^{−i E_n t} a_n`, and the weight of cell `ν`
//! with orthonormal basis `B_ν` is `‖B_ν† a(t)‖²`.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hilbert::StateVector;
use crate::macroscopic::MacroPartition;
use crate::superposition::BranchProfile;
use crate::C64;

use nalgebra::DVector;

/// Largest tolerated norm of the out-of-shell component in strict mode.
pub const SHELL_LEAKAGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShellPolicy {
    /// Fail when the state leaks out of the shell by more than
    /// [`SHELL_LEAKAGE_TOL`].
    #[default]
    Strict,
    /// Project onto the shell, renormalize and record the leakage.
    Project,
}

/// A state expressed in shell coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellState {
    pub coeffs: Vec<C64>,
    /// Norm of the discarded out-of-shell component.
    pub leakage: f64,
}

impl ShellState {
    pub fn populations(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }
}

pub fn project_into_shell(state: &StateVector, partition: &MacroPartition, policy: ShellPolicy) -> Result<ShellState> {
    let shell = &partition.shell;
    if state.len() != shell.ambient_dim() {
        return Err(Error::DimensionMismatch {
            what: "state",
            expected: shell.ambient_dim(),
            actual: state.len(),
        });
    }
    let psi = state.to_dvector();
    let a = shell.vectors.ad_mul(&psi);
    let leakage = (&psi - &shell.vectors * &a).norm();
    match policy {
        ShellPolicy::Strict if leakage > SHELL_LEAKAGE_TOL => Err(Error::OutsideShell {
            leakage,
            tol: SHELL_LEAKAGE_TOL,
        }),
        _ => {
            let norm = a.norm();
            if !(norm > 0.0) {
                return Err(Error::OutsideShell {
                    leakage,
                    tol: SHELL_LEAKAGE_TOL,
                });
            }
            Ok(ShellState {
                coeffs: a.iter().map(|c| c / norm).collect(),
                leakage,
            })
        }
    }
}

/// Full-space state from shell coefficients.
pub fn state_from_shell(coeffs: &[C64], partition: &MacroPartition) -> Result<StateVector> {
    let shell = &partition.shell;
    if coeffs.len() != shell.dim() {
        return Err(Error::DimensionMismatch {
            what: "shell coefficients",
            expected: shell.dim(),
            actual: coeffs.len(),
        });
    }
    let v = &shell.vectors * DVector::from_column_slice(coeffs);
    StateVector::normalized(v.iter().copied().collect(), crate::HilbertDims::single(shell.ambient_dim())?)
}

/// Cell weights of shell coefficients `a`.
pub fn cell_weights(coeffs: &[C64], partition: &MacroPartition) -> Vec<f64> {
    let a = DVector::from_column_slice(coeffs);
    partition
        .cells
        .iter()
        .map(|cell| cell.basis.ad_mul(&a).norm_squared())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QetTimeSeries {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `weights[t][ν] = ⟨Ψ(t)|P_ν|Ψ(t)⟩`.
    pub weights: Vec<Vec<f64>>,
    /// `d_ν / D`.
    pub targets: Vec<f64>,
    pub leakage: f64,
}

impl QetTimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |Σ_ν w_ν(t) − 1|`.
    pub fn completeness_defect(&self) -> f64 {
        self.weights
            .iter()
            .map(|w| (w.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Time average of each weight over `[t_0, t_last]` by the trapezoid rule.
    /// A single sample is returned as is.
    pub fn time_average(&self) -> Vec<f64> {
        let cells = self.targets.len();
        if self.times.len() == 1 {
            return self.weights[0].clone();
        }
        let span = self.times[self.times.len() - 1] - self.times[0];
        let mut acc = vec![0.0; cells];
        for k in 0..self.times.len() - 1 {
            let dt = self.times[k + 1] - self.times[k];
            for (nu, a) in acc.iter_mut().enumerate() {
                *a += 0.5 * dt * (self.weights[k][nu] + self.weights[k + 1][nu]);
            }
        }
        acc.iter().map(|a| a / span).collect()
    }

    /// Branch profile at every sampled time.
    pub fn branch_profiles(&self, threshold: f64) -> Result<Vec<BranchProfile>> {
        self.weights
            .iter()
            .map(|w| BranchProfile::from_weights(self.labels.clone(), w.clone(), threshold))
            .collect()
    }
}

/// `k · t_max / (n − 1)` for `k = 0..n`.
pub fn uniform_times(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "time grid",
            reason: format!("need n >= 2 and t_max > 0, got n={n}, t_max={t_max}"),
        });
    }
    Ok((0..n).map(|k| k as f64 * t_max / (n - 1) as f64).collect())
}

pub fn qet_time_series(
    state0: &StateVector,
    partition: &MacroPartition,
    times: &[f64],
    policy: ShellPolicy,
    exec: Execution,
) -> Result<QetTimeSeries> {
    if times.is_empty() {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: "must be non-empty".into(),
        });
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: "must be strictly increasing".into(),
        });
    }
    let start = project_into_shell(state0, partition, policy)?;
    let energies = &partition.shell.energies;
    let weights = exec.map_indexed(times.len(), |k| {
        let t = times[k];
        let a: Vec<C64> = start
            .coeffs
            .iter()
            .zip(energies)
            .map(|(c, &e)| c * C64::from_polar(1.0, -e * t))
            .collect();
        cell_weights(&a, partition)
    });
    Ok(QetTimeSeries {
        times: times.to_vec(),
        labels: partition.labels(),
        weights,
        targets: partition.targets(),
        leakage: start.leakage,
    })
}

/// Fraction of sampled times with `max_ν |w_ν − d_ν/D| ≤ ε`.
pub fn ergodic_fraction(series: &QetTimeSeries, epsilon: f64) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::InvalidParameter {
            name: "series",
            reason: "must be non-empty".into(),
        });
    }
    let hits = series
        .weights
        .iter()
        .filter(|w| {
            w.iter()
                .zip(&series.targets)
                .all(|(x, target)| (x - target).abs() <= epsilon)
        })
        .count();
    Ok(hits as f64 / series.len() as f64)
}

/// Infinite-time average of each cell weight for a non-degenerate shell
/// spectrum: `Σ_n |a_n|² ⟨φ_n|P_ν|φ_n⟩`.
pub fn diagonal_ensemble(coeffs: &[C64], partition: &MacroPartition) -> Vec<f64> {
    partition
        .cells
        .iter()
        .map(|cell| {
            coeffs
                .iter()
                .enumerate()
                .map(|(n, a)| a.norm_sqr() * cell.projector[(n, n)].re)
                .sum()
        })
        .collect()
}

/// Temporal standard deviation of each cell weight for a spectrum with
/// non-degenerate gaps: `σ_ν² = Σ_{m≠n} |a_m|² |a_n|² |⟨φ_m|P_ν|φ_n⟩|²`.
pub fn temporal_std(coeffs: &[C64], partition: &MacroPartition) -> Vec<f64> {
    let p: Vec<f64> = coeffs.iter().map(|a| a.norm_sqr()).collect();
    partition
        .cells
        .iter()
        .map(|cell| {
            let mut var = 0.0;
            for m in 0..p.len() {
                for n in 0..p.len() {
                    if m != n {
                        var += p[m] * p[n] * cell.projector[(m, n)].norm_sqr();
                    }
                }
            }
            var.sqrt()
        })
        .collect()
}

/// Smallest positive gap between shell levels with population above
/// `threshold`.
pub fn min_occupied_gap(energies: &[f64], coeffs: &[C64], threshold: f64) -> Option<f64> {
    let occupied: Vec<f64> = energies
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| c.norm_sqr() > threshold)
        .map(|(e, _)| *e)
        .collect();
    occupied
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|g| *g > 0.0)
        .min_by(f64::total_cmp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellCondition {
    pub label: String,
    /// `max_n |⟨φ_n|P_ν|φ_n⟩ − d_ν/D|`.
    pub max_diagonal_deviation: f64,
    /// `max_{m≠n} |⟨φ_m|P_ν|φ_n⟩|`.
    pub max_off_diagonal: f64,
}

/// How far the energy eigenbasis is from "looking typical" to each cell.
pub fn check_qet_condition(partition: &MacroPartition) -> Vec<CellCondition> {
    let d = partition.shell_dim();
    partition
        .cells
        .iter()
        .zip(partition.targets())
        .map(|(cell, target)| {
            let mut diag = 0.0f64;
            let mut off = 0.0f64;
            for m in 0..d {
                for n in 0..d {
                    let z = cell.projector[(m, n)];
                    if m == n {
                        diag = diag.max((z.re - target).abs());
                    } else {
                        off = off.max(z.norm());
                    }
                }
            }
            CellCondition {
                label: cell.label.clone(),
                max_diagonal_deviation: diag,
                max_off_diagonal: off,
            }
        })
        .collect()
}
