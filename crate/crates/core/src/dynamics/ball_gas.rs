//! One-dimensional ball-and-gas lattice model.
//!
//! A heavy ball (hopping `t_B`) and `n_gas` distinguishable gas particles
//! (hopping `t_G`) live on an open chain of `L` sites. Gas particles are
//! mutually hard-core. Ball-gas coincidence is either excluded from the
//! basis (hard-core) or penalized by `U_X` per coinciding particle. The
//! floor is tilted, `V(Q) = v·Q`, and an optional random diagonal
//! perturbation of amplitude `η` breaks accidental degeneracies.
//!
//! Basis states are `(Q, x_1, …, x_n)` in lexicographic order.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HermitianOperator, HilbertDims, StateVector, Units};
use crate::sampler::SeededStream;
use crate::C64;

pub const DEFAULT_DIM_CAP: usize = 4096;
/// Stream id reserved for the diagonal perturbation.
const PERTURBATION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    HardCore,
    Soft { repulsion: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BallGasConfig {
    pub sites: usize,
    pub n_gas: usize,
    pub ball_hop: f64,
    pub gas_hop: f64,
    pub tilt: f64,
    pub exclusion: Exclusion,
    pub eta: f64,
    pub seed: u64,
    pub dim_cap: usize,
}

impl Default for BallGasConfig {
    fn default() -> Self {
        Self {
            sites: 8,
            n_gas: 1,
            ball_hop: 0.7,
            gas_hop: 1.0,
            tilt: 1e-3,
            exclusion: Exclusion::HardCore,
            eta: 1e-6,
            seed: 0,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

impl BallGasConfig {
    /// Hilbert-space dimension, computed without enumerating the basis.
    pub fn dimension(&self) -> u128 {
        let l = self.sites as u128;
        let free = match self.exclusion {
            Exclusion::HardCore => l.saturating_sub(1),
            Exclusion::Soft { .. } => l,
        };
        if (self.n_gas as u128) > free {
            return 0;
        }
        let mut gas = 1u128;
        for k in 0..self.n_gas as u128 {
            gas = gas.saturating_mul(free - k);
        }
        l.saturating_mul(gas)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::InvalidParameter {
                name: "sites",
                reason: "must be at least 1".into(),
            });
        }
        for (name, v) in [("ball_hop", self.ball_hop), ("gas_hop", self.gas_hop), ("tilt", self.tilt)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite".into(),
                });
            }
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: "must be non-negative".into(),
            });
        }
        if let Exclusion::Soft { repulsion } = self.exclusion {
            if !(repulsion >= 0.0) || !repulsion.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "exclusion",
                    reason: "repulsion must be non-negative".into(),
                });
            }
        }
        let dim = self.dimension();
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "n_gas",
                reason: format!("{} gas particles do not fit on {} sites", self.n_gas, self.sites),
            });
        }
        if dim > self.dim_cap as u128 {
            return Err(Error::DimensionOverflow { dim, cap: self.dim_cap });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallGasModel {
    config: BallGasConfig,
    /// `(Q, x_1, …, x_n)` per basis index.
    basis: Vec<Vec<usize>>,
    hamiltonian: HermitianOperator,
}

fn enumerate_basis(cfg: &BallGasConfig) -> Vec<Vec<usize>> {
    fn extend(cfg: &BallGasConfig, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == cfg.n_gas + 1 {
            out.push(current.clone());
            return;
        }
        for site in 0..cfg.sites {
            let taken_by_gas = current[1..].contains(&site);
            let on_ball = site == current[0];
            let blocked = taken_by_gas || (on_ball && cfg.exclusion == Exclusion::HardCore);
            if !blocked {
                current.push(site);
                extend(cfg, current, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    for q in 0..cfg.sites {
        let mut cur = vec![q];
        extend(cfg, &mut cur, &mut out);
    }
    out
}

impl BallGasModel {
    pub fn new(config: BallGasConfig) -> Result<Self> {
        config.validate()?;
        let basis = enumerate_basis(&config);
        let index: HashMap<&[usize], usize> = basis.iter().enumerate().map(|(i, b)| (b.as_slice(), i)).collect();
        let n = basis.len();
        let mut h = DMatrix::<f64>::zeros(n, n);
        let mut rng = SeededStream::new(config.seed, PERTURBATION_STREAM).rng();
        for (i, b) in basis.iter().enumerate() {
            let q = b[0];
            let mut diag = config.tilt * q as f64;
            if let Exclusion::Soft { repulsion } = config.exclusion {
                diag += repulsion * b[1..].iter().filter(|&&x| x == q).count() as f64;
            }
            if config.eta > 0.0 {
                diag += config.eta * rng.random_range(-1.0..1.0);
            }
            h[(i, i)] += diag;

            // Particle p moves to a neighboring site; only the forward
            // direction is enumerated and the matrix is filled symmetrically.
            for p in 0..b.len() {
                let hop = if p == 0 { config.ball_hop } else { config.gas_hop };
                if hop == 0.0 {
                    continue;
                }
                let target = b[p] + 1;
                if target >= config.sites {
                    continue;
                }
                let mut moved = b.clone();
                moved[p] = target;
                if let Some(&j) = index.get(moved.as_slice()) {
                    h[(i, j)] -= hop;
                    h[(j, i)] -= hop;
                }
            }
        }
        let hamiltonian = HermitianOperator::from_real(h, Units::Energy)?;
        Ok(Self {
            config,
            basis,
            hamiltonian,
        })
    }

    pub fn config(&self) -> &BallGasConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    /// Ball position `Q` (diagonal in the lattice basis).
    pub fn ball_position(&self) -> HermitianOperator {
        let q: Vec<f64> = self.basis.iter().map(|b| b[0] as f64).collect();
        HermitianOperator::from_diagonal(&q, Units::Dimensionless)
    }

    /// Band edges splitting the `L` ball positions into `cells` contiguous
    /// bins of (nearly) equal size, placed halfway between sites.
    pub fn position_bin_edges(&self, cells: usize) -> Result<Vec<f64>> {
        let l = self.config.sites;
        if cells == 0 || cells > l {
            return Err(Error::InvalidParameter {
                name: "cells",
                reason: format!("need 1 <= cells <= sites ({l}), got {cells}"),
            });
        }
        Ok((0..=cells).map(|c| (c * l) as f64 / cells as f64 - 0.5).collect())
    }

    /// Embeds a model state into `ball ⊗ gas` with dims `(L, L^n_gas)`;
    /// excluded configurations get amplitude zero.
    pub fn to_ball_gas_product_space(&self, state: &StateVector) -> Result<StateVector> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: self.dim(),
                actual: state.len(),
            });
        }
        let l = self.config.sites;
        let gas_dim = l.pow(self.config.n_gas as u32);
        let dims = HilbertDims::new(l, gas_dim)?;
        let mut amps = vec![C64::new(0.0, 0.0); dims.total()];
        for (b, a) in self.basis.iter().zip(state.amplitudes()) {
            let gas_index = b[1..].iter().fold(0usize, |acc, &x| acc * l + x);
            amps[dims.index(b[0], gas_index)] = *a;
        }
        Ok(StateVector::from_unitary_image(amps, dims))
    }
}
