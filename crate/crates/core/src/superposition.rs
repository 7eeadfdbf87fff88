//! Schmidt decomposition, macro-branch weights and the spin-pointer
//! measurement model.

use nalgebra::DMatrix;

use crate::dynamics::qet::{cell_weights, project_into_shell, ShellPolicy};
use crate::error::{Error, Result};
use crate::hilbert::{HilbertDims, StateVector};
use crate::macroscopic::MacroPartition;
use crate::C64;

/// `Ψ = Σ_k λ_k u_k ⊗ v_k` with `λ_1 ≥ λ_2 ≥ … ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    /// `n1 × k`, column `k` is `u_k`.
    pub left_vectors: DMatrix<C64>,
    /// `n2 × k`, column `k` is `v_k`.
    pub right_vectors: DMatrix<C64>,
    pub dims: HilbertDims,
}

impl SchmidtDecomposition {
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&c| c > tol).count()
    }

    /// `λ_k²`, the spectrum of both reduced states.
    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c * c).collect()
    }

    /// `Σ_k λ_k u_k ⊗ v_k` in lexicographic order.
    pub fn reconstruct(&self) -> Vec<C64> {
        let (n1, n2) = (self.dims.n1(), self.dims.n2());
        let mut out = vec![C64::new(0.0, 0.0); n1 * n2];
        for (k, &lambda) in self.coefficients.iter().enumerate() {
            for a in 0..n1 {
                let ua = self.left_vectors[(a, k)] * lambda;
                for b in 0..n2 {
                    out[a * n2 + b] += ua * self.right_vectors[(b, k)];
                }
            }
        }
        out
    }

    /// Von Neumann entropy of either reduced state in nats.
    pub fn entropy(&self) -> f64 {
        self.weights()
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }
}

pub fn schmidt_decompose(state: &StateVector, dims: HilbertDims) -> Result<SchmidtDecomposition> {
    if state.len() != dims.total() {
        return Err(Error::DimensionMismatch {
            what: "state",
            expected: dims.total(),
            actual: state.len(),
        });
    }
    let c = state.with_dims(dims)?.coefficient_matrix();
    let svd = c.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients = order.iter().map(|&k| svd.singular_values[k]).collect();
    let left_vectors = u.select_columns(&order);
    // C = U Σ V†, so c_{ab} = Σ_k λ_k U_{ak} (V†)_{kb}: v_k is row k of V†.
    let right_vectors = DMatrix::from_fn(dims.n2(), order.len(), |b, k| v_t[(order[k], b)]);
    Ok(SchmidtDecomposition {
        coefficients,
        left_vectors,
        right_vectors,
        dims,
    })
}

/// Entanglement entropy of the first factor in nats, `0·ln 0 = 0`.
pub fn entanglement_entropy(state: &StateVector, dims: HilbertDims) -> Result<f64> {
    Ok(schmidt_decompose(state, dims)?.entropy())
}

pub fn branch_purity_series(states: &[StateVector], dims: HilbertDims) -> Result<Vec<f64>> {
    states.iter().map(|s| entanglement_entropy(s, dims)).collect()
}

/// Cell weights of a state and the number of cells it occupies.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchProfile {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
    pub threshold: f64,
    pub branch_count: usize,
}

impl BranchProfile {
    /// The threshold must lie in `(0, 1/cells]`, which guarantees at least
    /// one occupied branch for weights that sum to one.
    pub fn from_weights(labels: Vec<String>, weights: Vec<f64>, threshold: f64) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                what: "branch labels",
                expected: weights.len(),
                actual: labels.len(),
            });
        }
        if weights.is_empty() {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "need at least one cell".into(),
            });
        }
        let cap = 1.0 / weights.len() as f64;
        if !(threshold > 0.0 && threshold < 1.0) || threshold > cap {
            return Err(Error::InvalidParameter {
                name: "threshold",
                reason: format!("must lie in (0, 1/cells] = (0, {cap}], got {threshold}"),
            });
        }
        let branch_count = weights.iter().filter(|&&w| w >= threshold).count();
        Ok(Self {
            labels,
            weights,
            threshold,
            branch_count,
        })
    }

    pub fn is_superposition(&self) -> bool {
        self.branch_count >= 2
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Half of the smallest typical weight `d_ν / D`.
pub fn default_threshold(partition: &MacroPartition) -> f64 {
    0.5 * partition.targets().into_iter().fold(f64::INFINITY, f64::min)
}

pub fn branch_profile(
    state: &StateVector,
    partition: &MacroPartition,
    threshold: f64,
    policy: ShellPolicy,
) -> Result<BranchProfile> {
    let shell_state = project_into_shell(state, partition, policy)?;
    BranchProfile::from_weights(partition.labels(), cell_weights(&shell_state.coeffs, partition), threshold)
}

/// Largest spin count for which dense device states are built.
pub const DENSE_SPIN_CAP: usize = 16;

/// A qubit in `c₊|+⟩ + c₋|−⟩` recorded by `N` spins, each rotated by `±θ`
/// about the y axis depending on the qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerModel {
    pub n_spins: usize,
    pub theta: f64,
    pub c_plus: C64,
    pub c_minus: C64,
}

impl PointerModel {
    pub fn new(n_spins: usize, theta: f64, c_plus: C64, c_minus: C64) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::InvalidParameter {
                name: "n_spins",
                reason: "must be at least 1".into(),
            });
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: format!("must be finite, got {theta}"),
            });
        }
        let norm_sqr = c_plus.norm_sqr() + c_minus.norm_sqr();
        if (norm_sqr - 1.0).abs() > crate::hilbert::NORM_TOL {
            return Err(Error::NotNormalized {
                norm_sqr,
                tol: crate::hilbert::NORM_TOL,
            });
        }
        Ok(Self {
            n_spins,
            theta,
            c_plus,
            c_minus,
        })
    }

    /// Single-spin record for the `+` (`sign = 1`) or `−` (`sign = −1`)
    /// outcome: `R_y(±θ)|0⟩ = cos(θ/2)|0⟩ ± sin(θ/2)|1⟩`.
    pub fn spin_state(&self, sign: f64) -> [C64; 2] {
        let h = 0.5 * self.theta;
        [C64::new(h.cos(), 0.0), C64::new(sign * h.sin(), 0.0)]
    }
}

/// `c₊|+⟩⊗|s₊⟩^{⊗N} + c₋|−⟩⊗|s₋⟩^{⊗N}`, kept in product form.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerState {
    pub n_spins: usize,
    pub c_plus: C64,
    pub c_minus: C64,
    pub spin_plus: [C64; 2],
    pub spin_minus: [C64; 2],
}

impl PointerState {
    pub fn norm_sqr(&self) -> f64 {
        let n = self.n_spins as i32;
        let sp = self.spin_plus[0].norm_sqr() + self.spin_plus[1].norm_sqr();
        let sm = self.spin_minus[0].norm_sqr() + self.spin_minus[1].norm_sqr();
        // The qubit branches are orthogonal, so there is no cross term.
        self.c_plus.norm_sqr() * sp.powi(n) + self.c_minus.norm_sqr() * sm.powi(n)
    }

    /// `⟨M₊|M₋⟩ = ⟨s₊|s₋⟩^N` as a product of per-spin inner products.
    pub fn device_overlap(&self) -> C64 {
        let per_spin = self.spin_plus[0].conj() * self.spin_minus[0] + self.spin_plus[1].conj() * self.spin_minus[1];
        (0..self.n_spins).fold(C64::new(1.0, 0.0), |acc, _| acc * per_spin)
    }

    /// Dense amplitudes, qubit index most significant, spin 1 next.
    pub fn to_dense(&self) -> Result<Vec<C64>> {
        check_dense(self.n_spins)?;
        let mut out = device_product(&self.spin_plus, self.n_spins)
            .into_iter()
            .map(|a| a * self.c_plus)
            .collect::<Vec<_>>();
        out.extend(device_product(&self.spin_minus, self.n_spins).into_iter().map(|a| a * self.c_minus));
        Ok(out)
    }
}

fn check_dense(n_spins: usize) -> Result<()> {
    if n_spins > DENSE_SPIN_CAP {
        return Err(Error::DimensionOverflow {
            dim: 1u128 << (n_spins + 1).min(127),
            cap: 1usize << (DENSE_SPIN_CAP + 1),
        });
    }
    Ok(())
}

fn device_product(spin: &[C64; 2], n: usize) -> Vec<C64> {
    let mut v = vec![C64::new(1.0, 0.0)];
    for _ in 0..n {
        v = v.iter().flat_map(|&a| [a * spin[0], a * spin[1]]).collect();
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointerOutcome {
    pub state: PointerState,
    /// `|⟨M₊|M₋⟩|` from the constructed spin states.
    pub branch_overlap: f64,
    /// `|cos θ|^N`.
    pub closed_form: f64,
}

/// Couples the qubit to the device and returns the entangled final state
/// with the overlap of the two device records.
pub fn pointer_measure(model: &PointerModel) -> PointerOutcome {
    let state = PointerState {
        n_spins: model.n_spins,
        c_plus: model.c_plus,
        c_minus: model.c_minus,
        spin_plus: model.spin_state(1.0),
        spin_minus: model.spin_state(-1.0),
    };
    let branch_overlap = state.device_overlap().norm();
    let closed_form = model.theta.cos().abs().powi(model.n_spins as i32);
    PointerOutcome {
        state,
        branch_overlap,
        closed_form,
    }
}

/// Applies the controlled rotation `|±⟩⟨±| ⊗ R_y(±θ)^{⊗N}` to an arbitrary
/// qubit-plus-device vector of length `2^{N+1}`.
pub fn apply_controlled_rotation(theta: f64, n_spins: usize, input: &[C64]) -> Result<Vec<C64>> {
    check_dense(n_spins)?;
    let half = 1usize << n_spins;
    if input.len() != 2 * half {
        return Err(Error::DimensionMismatch {
            what: "pointer input",
            expected: 2 * half,
            actual: input.len(),
        });
    }
    let mut out = input.to_vec();
    for (branch, sign) in [(0usize, 1.0f64), (1, -1.0)] {
        let (c, s) = ((0.5 * theta).cos(), sign * (0.5 * theta).sin());
        let block = &mut out[branch * half..(branch + 1) * half];
        for spin in 0..n_spins {
            let stride = 1usize << (n_spins - 1 - spin);
            for base in 0..half {
                if base & stride != 0 {
                    continue;
                }
                let (a0, a1) = (block[base], block[base | stride]);
                block[base] = a0 * c - a1 * s;
                block[base | stride] = a0 * s + a1 * c;
            }
        }
    }
    Ok(out)
}

/// `|cos θ|^N` for `N = 1..=n_max`.
pub fn overlap_curve(theta: f64, n_max: usize) -> Vec<(usize, f64)> {
    let c = theta.cos().abs();
    (1..=n_max).map(|n| (n, c.powi(n as i32))).collect()
}
