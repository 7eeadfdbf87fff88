//! Uniform sampling of pure states on the unit sphere `S^{2d−1} ⊂ ℂ^d`.
//!
//! Generator: ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded with
//! `seed_from_u64(seed)` and switched to stream `stream_id` with
//! `set_stream`. ChaCha supports 2^64 independent streams, so Monte Carlo
//! trial `i` uses stream `i` and the result of a run does not depend on how
//! trials are scheduled. A state of dimension `d` consumes `2d` standard
//! normals (real part, then imaginary part, per amplitude in index order),
//! which are then normalized.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::{chunks, Execution};
use crate::hilbert::{partial_trace, HilbertDims, StateVector, Subsystem};
use crate::C64;

/// Trials per work item in parallel reductions. Fixed so that floating-point
/// summation order is independent of the worker count.
pub(crate) const BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Haar-random pure state of dimension `dim` drawn from `rng`.
pub fn sample_state_with<R: Rng + ?Sized>(dims: HilbertDims, rng: &mut R) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..dims.total())
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im)
            })
            .collect();
        // All-zero draws have probability zero; retry rather than fail.
        if let Ok(s) = StateVector::normalized(amps, dims) {
            return s;
        }
    }
}

/// Haar-random pure state of dimension `dim` from a fresh stream.
pub fn sample_uniform_state(dim: usize, stream: SeededStream) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "must be at least 1".into(),
        });
    }
    let dims = HilbertDims::single(dim)?;
    Ok(sample_state_with(dims, &mut stream.rng()))
}

/// Haar-random bipartite state on `n1 ⊗ n2` from a fresh stream.
pub fn sample_bipartite_state(dims: HilbertDims, stream: SeededStream) -> StateVector {
    sample_state_with(dims, &mut stream.rng())
}

/// Empirical second moments `M[a, b] = mean(c_a c*_b)` over `trials`
/// samples; trial `i` uses stream `i` of `seed`.
pub fn estimate_coefficient_moments(
    dim: usize,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<DMatrix<C64>> {
    if dim == 0 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "must be at least 1".into(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "must be at least 1".into(),
        });
    }
    let dims = HilbertDims::single(dim)?;
    let batches = chunks(trials, BATCH);
    let partials = exec.map_indexed(batches.len(), |b| {
        let (lo, hi) = batches[b];
        let mut acc = DMatrix::<C64>::zeros(dim, dim);
        for trial in lo..hi {
            let psi = sample_bipartite_state(dims, SeededStream::new(seed, trial as u64));
            let c = psi.amplitudes();
            for a in 0..dim {
                for bb in 0..dim {
                    acc[(a, bb)] += c[a] * c[bb].conj();
                }
            }
        }
        acc
    });
    let mut total = DMatrix::<C64>::zeros(dim, dim);
    for p in partials {
        total += p;
    }
    Ok(total / C64::new(trials as f64, 0.0))
}

/// Mean of `ρ₁ = tr₂|ψ⟩⟨ψ|` over `trials` random states on `dims`.
pub fn mean_reduced_state(dims: HilbertDims, trials: usize, seed: u64, exec: Execution) -> Result<DMatrix<C64>> {
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "must be at least 1".into(),
        });
    }
    let n1 = dims.n1();
    let batches = chunks(trials, BATCH);
    let partials = exec.map_indexed(batches.len(), |b| {
        let (lo, hi) = batches[b];
        let mut acc = DMatrix::<C64>::zeros(n1, n1);
        for trial in lo..hi {
            let psi = sample_bipartite_state(dims, SeededStream::new(seed, trial as u64));
            let rho = partial_trace(&psi, dims, Subsystem::First).expect("dims match by construction");
            acc += rho.entries();
        }
        acc
    });
    let mut total = DMatrix::<C64>::zeros(n1, n1);
    for p in partials {
        total += p;
    }
    Ok(total / C64::new(trials as f64, 0.0))
}
