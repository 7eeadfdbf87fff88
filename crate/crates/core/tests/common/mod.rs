//! Independent reference implementations shared by the integration tests.
//! Nothing here calls the optimized library routines it is used to check.
#![allow(dead_code)]

use nalgebra::DMatrix;
use qetlab::sampler::{sample_bipartite_state, SeededStream};
use qetlab::{HilbertDims, StateVector, C64};

pub fn random_state(n1: usize, n2: usize, seed: u64, stream: u64) -> StateVector {
    sample_bipartite_state(HilbertDims::new(n1, n2).unwrap(), SeededStream::new(seed, stream))
}

/// `ρ₁[j][k] = Σ_b ψ[j·n2 + b] ψ*[k·n2 + b]`, one entry at a time.
pub fn naive_rho1(psi: &[C64], n1: usize, n2: usize) -> DMatrix<C64> {
    let mut rho = DMatrix::zeros(n1, n1);
    for j in 0..n1 {
        for k in 0..n1 {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..n2 {
                acc += psi[j * n2 + b] * psi[k * n2 + b].conj();
            }
            rho[(j, k)] = acc;
        }
    }
    rho
}

/// `ρ₂[a][b] = Σ_j ψ[j·n2 + a] ψ*[j·n2 + b]`.
pub fn naive_rho2(psi: &[C64], n1: usize, n2: usize) -> DMatrix<C64> {
    let mut rho = DMatrix::zeros(n2, n2);
    for a in 0..n2 {
        for b in 0..n2 {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n1 {
                acc += psi[j * n2 + a] * psi[j * n2 + b].conj();
            }
            rho[(a, b)] = acc;
        }
    }
    rho
}

/// Eigenvalues of a Hermitian matrix through the real symmetric embedding
/// `[[A, −B], [B, A]]`, whose spectrum is that of `A + iB` doubled.
pub fn hermitian_spectrum_desc(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    let big = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev: Vec<f64> = big.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.into_iter().step_by(2).collect()
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
