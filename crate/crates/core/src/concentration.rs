//! Concentration of reduced density matrix entries for Haar-random states.
//!
//! For `f` Lipschitz on `S^{2 n1 n2 − 1}` with norm `‖f‖_L`:
//!
//! - deviation from the median (which equals the mean for the off-diagonal
//!   entries): `P(|f − m| ≥ ε) ≤ exp(−n1 n2 ε² / ‖f‖_L²)`;
//! - deviation from the mean: `P(|f − E f| ≥ ε) ≤ exp(−n1 n2 (ε − δ)² / ‖f‖_L²)`
//!   for `ε > δ`, with `δ = (π / (4 n1 n2))^{1/2} ‖f‖_L`.
//!
//! The squared gradient norms give `‖f‖_L = 2` for `Re(ρ₁)_{jj}` and
//! `‖f‖_L = 1` for `Re/Im(ρ₁)_{jk}`, `j ≠ k`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec::{chunks, Execution};
use crate::hilbert::{
    distance_to_maximally_mixed, partial_trace, DensityMatrix, HilbertDims, StateVector, Subsystem,
};
use crate::sampler::{sample_bipartite_state, SeededStream, BATCH};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviationKind {
    /// `Re(ρ₁)_{jj} − 1/n1`.
    DiagonalRe,
    /// `Re(ρ₁)_{jk}`, `j ≠ k`.
    OffDiagonalRe,
    /// `Im(ρ₁)_{jk}`, `j ≠ k`.
    OffDiagonalIm,
}

impl DeviationKind {
    pub const ALL: [DeviationKind; 3] = [
        DeviationKind::DiagonalRe,
        DeviationKind::OffDiagonalRe,
        DeviationKind::OffDiagonalIm,
    ];

    /// Upper bound on `sup ‖∇_c f‖` over the unit sphere.
    pub fn lipschitz_norm(self) -> f64 {
        match self {
            DeviationKind::DiagonalRe => 2.0,
            DeviationKind::OffDiagonalRe | DeviationKind::OffDiagonalIm => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DeviationKind::DiagonalRe => "diagonal_re",
            DeviationKind::OffDiagonalRe => "off_diagonal_re",
            DeviationKind::OffDiagonalIm => "off_diagonal_im",
        }
    }
}

impl fmt::Display for DeviationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyBoundParams {
    pub n1: usize,
    pub n2: usize,
    pub epsilon: f64,
    pub lipschitz_norm: f64,
    pub delta: f64,
}

impl LevyBoundParams {
    pub fn new(n1: usize, n2: usize, epsilon: f64, lipschitz_norm: f64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidDimensions(format!("n1={n1}, n2={n2}")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("must be positive, got {epsilon}"),
            });
        }
        if !(lipschitz_norm > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lipschitz_norm",
                reason: format!("must be positive, got {lipschitz_norm}"),
            });
        }
        let delta = (PI / (4.0 * (n1 * n2) as f64)).sqrt() * lipschitz_norm;
        Ok(Self {
            n1,
            n2,
            epsilon,
            lipschitz_norm,
            delta,
        })
    }

    fn dim(&self) -> f64 {
        (self.n1 * self.n2) as f64
    }

    /// Bound on deviation from the median.
    pub fn median_bound(&self) -> f64 {
        (-self.dim() * self.epsilon.powi(2) / self.lipschitz_norm.powi(2)).exp()
    }

    /// Bound on deviation from the mean; requires `ε > δ`.
    pub fn expectation_bound(&self) -> Result<f64> {
        if self.epsilon <= self.delta {
            return Err(Error::BoundNotApplicable {
                epsilon: self.epsilon,
                delta: self.delta,
            });
        }
        Ok((-self.dim() * (self.epsilon - self.delta).powi(2) / self.lipschitz_norm.powi(2)).exp())
    }
}

/// Tail bound on `|deviation| ≥ ε` for one entry of `ρ₁`.
pub fn levy_bound(kind: DeviationKind, n1: usize, n2: usize, epsilon: f64) -> Result<f64> {
    let p = LevyBoundParams::new(n1, n2, epsilon, kind.lipschitz_norm())?;
    match kind {
        DeviationKind::DiagonalRe => p.expectation_bound(),
        DeviationKind::OffDiagonalRe | DeviationKind::OffDiagonalIm => Ok(p.median_bound()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// Gradient of `Re(ρ₁)_{j1,k1}` or `Im(ρ₁)_{j1,k1}` with respect to the real
/// coordinates of the state. Layout: `[c′ (n1·n2 entries, lexicographic),
/// c″ (n1·n2 entries, lexicographic)]` where `c = c′ + i c″`.
pub fn gradient_of_reduced_entry(
    state: &StateVector,
    dims: HilbertDims,
    j1: usize,
    k1: usize,
    part: Part,
) -> Result<Vec<f64>> {
    let (n1, n2) = (dims.n1(), dims.n2());
    if state.len() != dims.total() {
        return Err(Error::DimensionMismatch {
            what: "state",
            expected: dims.total(),
            actual: state.len(),
        });
    }
    for (name, idx) in [("j1", j1), ("k1", k1)] {
        if idx >= n1 {
            return Err(Error::IndexOutOfRange {
                name,
                index: idx,
                bound: n1,
            });
        }
    }
    let c = state.amplitudes();
    let nn = dims.total();
    let mut grad = vec![0.0; 2 * nn];
    for l2 in 0..n2 {
        let cj = c[dims.index(j1, l2)];
        let ck = c[dims.index(k1, l2)];
        let at_j = dims.index(j1, l2);
        let at_k = dims.index(k1, l2);
        match part {
            // ∂/∂c′_{l1,l2} = δ_{l1,j} c′_{k,l2} + c′_{j,l2} δ_{l1,k}; same with c″.
            Part::Re => {
                grad[at_j] += ck.re;
                grad[at_k] += cj.re;
                grad[nn + at_j] += ck.im;
                grad[nn + at_k] += cj.im;
            }
            // ∂/∂c′_{l1,l2} = c″_{j,l2} δ_{l1,k} − δ_{l1,j} c″_{k,l2};
            // ∂/∂c″_{l1,l2} = δ_{l1,j} c′_{k,l2} − c′_{j,l2} δ_{l1,k}.
            Part::Im => {
                grad[at_k] += cj.im;
                grad[at_j] -= ck.im;
                grad[nn + at_j] += ck.re;
                grad[nn + at_k] -= cj.re;
            }
        }
    }
    Ok(grad)
}

/// Closed form of `‖∇_c Re/Im(ρ₁)_{j1,k1}‖²`:
/// `Σ_{l2}(|c_{j1,l2}|² + |c_{k1,l2}|²) ± 2 δ_{j1,k1} Σ_{l2} |c_{j1,l2}|²`.
pub fn gradient_norm_sqr_closed_form(
    state: &StateVector,
    dims: HilbertDims,
    j1: usize,
    k1: usize,
    part: Part,
) -> f64 {
    let c = state.amplitudes();
    let row = |j: usize| -> f64 { (0..dims.n2()).map(|l| c[dims.index(j, l)].norm_sqr()).sum() };
    let base = row(j1) + row(k1);
    if j1 != k1 {
        return base;
    }
    match part {
        Part::Re => base + 2.0 * row(j1),
        Part::Im => base - 2.0 * row(j1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub kind: DeviationKind,
    pub epsilon: f64,
    /// Fraction of (trial, entry) pairs with `|deviation| ≥ ε`.
    pub empirical: f64,
    /// Theoretical tail bound; `1.0` when the exponential form does not apply.
    pub bound: f64,
    /// Binomial standard error at the bound, `sqrt(bound (1 − bound) / trials)`.
    pub stderr: f64,
    pub bound_applies: bool,
}

impl ConcentrationRow {
    /// `empirical ≤ bound + sigmas · stderr`.
    pub fn within(&self, sigmas: f64) -> bool {
        self.empirical <= self.bound + sigmas * self.stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub n1: usize,
    pub n2: usize,
    pub trials: usize,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub rows: Vec<ConcentrationRow>,
    /// Empirical mean of `ρ₁` over all trials.
    pub mean_rho: DMatrix<C64>,
    /// `‖mean ρ₁ − I/n1‖_F`.
    pub mean_distance: f64,
    /// Largest `|deviation|` of any tracked entry over all trials.
    pub max_deviation: f64,
}

impl ConcentrationReport {
    pub fn rows_for(&self, kind: DeviationKind) -> impl Iterator<Item = &ConcentrationRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    /// Worst `empirical / bound` over all rows.
    pub fn worst_ratio(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.empirical / r.bound)
            .fold(0.0, f64::max)
    }

    pub fn all_within(&self, sigmas: f64) -> bool {
        self.rows.iter().all(|r| r.within(sigmas))
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "epsilon_grid",
            reason: "must be non-empty".into(),
        });
    }
    if grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "epsilon_grid",
            reason: "entries must be positive and finite".into(),
        });
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "epsilon_grid",
            reason: "must be strictly increasing".into(),
        });
    }
    Ok(())
}

struct BatchTally {
    /// `counts[kind][eps]` of exceedances.
    counts: [Vec<u64>; 3],
    rho_sum: DMatrix<C64>,
    max_dev: f64,
}

/// Monte Carlo check of the entrywise tail bounds for `ρ₁` of random states on
/// `n1 ⊗ n2`. Trial `i` draws its state from stream `i` of `seed`.
pub fn run_concentration_experiment(
    n1: usize,
    n2: usize,
    trials: usize,
    epsilon_grid: &[f64],
    seed: u64,
    exec: Execution,
) -> Result<ConcentrationReport> {
    let dims = HilbertDims::new(n1, n2)?;
    if trials < 100 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: format!("must be at least 100, got {trials}"),
        });
    }
    validate_grid(epsilon_grid)?;
    let kinds: Vec<DeviationKind> = if n1 > 1 {
        DeviationKind::ALL.to_vec()
    } else {
        vec![DeviationKind::DiagonalRe]
    };
    let inv_n1 = 1.0 / n1 as f64;
    let g = epsilon_grid.len();
    let batches = chunks(trials, BATCH);

    let tallies = exec.map_indexed(batches.len(), |b| {
        let (lo, hi) = batches[b];
        let mut t = BatchTally {
            counts: [vec![0; g], vec![0; g], vec![0; g]],
            rho_sum: DMatrix::zeros(n1, n1),
            max_dev: 0.0,
        };
        let tally = |slot: usize, dev: f64, t: &mut BatchTally| {
            let a = dev.abs();
            t.max_dev = t.max_dev.max(a);
            for (e, eps) in epsilon_grid.iter().enumerate() {
                if a >= *eps {
                    t.counts[slot][e] += 1;
                }
            }
        };
        for trial in lo..hi {
            let psi = sample_bipartite_state(dims, SeededStream::new(seed, trial as u64));
            let rho = partial_trace(&psi, dims, Subsystem::First).expect("dims match by construction");
            for j in 0..n1 {
                tally(0, rho.get(j, j).re - inv_n1, &mut t);
                for k in (j + 1)..n1 {
                    let z = rho.get(j, k);
                    tally(1, z.re, &mut t);
                    tally(2, z.im, &mut t);
                }
            }
            t.rho_sum += rho.entries();
        }
        t
    });

    let mut counts = [vec![0u64; g], vec![0u64; g], vec![0u64; g]];
    let mut rho_sum = DMatrix::<C64>::zeros(n1, n1);
    let mut max_deviation = 0.0f64;
    for t in tallies {
        for (slot, c) in t.counts.iter().enumerate() {
            for (acc, x) in counts[slot].iter_mut().zip(c) {
                *acc += x;
            }
        }
        rho_sum += t.rho_sum;
        max_deviation = max_deviation.max(t.max_dev);
    }

    let entries_per_trial = |kind: DeviationKind| match kind {
        DeviationKind::DiagonalRe => n1,
        _ => n1 * (n1 - 1) / 2,
    };
    let mut rows = Vec::with_capacity(kinds.len() * g);
    for kind in kinds {
        let slot = DeviationKind::ALL.iter().position(|k| *k == kind).unwrap();
        let samples = (trials * entries_per_trial(kind)) as f64;
        for (e, &epsilon) in epsilon_grid.iter().enumerate() {
            let (bound, bound_applies) = match levy_bound(kind, n1, n2, epsilon) {
                Ok(b) => (b, true),
                Err(Error::BoundNotApplicable { .. }) => (1.0, false),
                Err(e) => return Err(e),
            };
            let empirical = counts[slot][e] as f64 / samples;
            rows.push(ConcentrationRow {
                kind,
                epsilon,
                empirical,
                bound,
                stderr: (bound * (1.0 - bound) / trials as f64).sqrt(),
                bound_applies,
            });
        }
    }

    let mean_rho = rho_sum / C64::new(trials as f64, 0.0);
    let mean_distance = distance_to_maximally_mixed(&DensityMatrix::from_trusted(mean_rho.clone()));
    Ok(ConcentrationReport {
        n1,
        n2,
        trials,
        seed,
        grid: epsilon_grid.to_vec(),
        rows,
        mean_rho,
        mean_distance,
        max_deviation,
    })
}
