//! Finite-dimensional Hilbert-space types.
//!
//! Bipartite amplitudes are stored lexicographically with the subsystem-1
//! index major: `c[j1 * n2 + j2]`. Under this convention the coefficient
//! matrix `C[j1, j2]` is row-major and `ρ₁ = C C†`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Tolerance on `Σ|c|² = 1`.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance on Hermiticity and unit trace.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a density matrix.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertDims {
    n1: usize,
    n2: usize,
}

impl HilbertDims {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidDimensions(format!(
                "subsystem dimensions must be positive, got n1={n1}, n2={n2}"
            )));
        }
        Ok(Self { n1, n2 })
    }

    /// A single (non-bipartite) space of dimension `n`, viewed as `n ⊗ 1`.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(n, 1)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn total(&self) -> usize {
        self.n1 * self.n2
    }

    #[inline]
    pub fn index(&self, j1: usize, j2: usize) -> usize {
        j1 * self.n2 + j2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Unit-norm amplitude vector on `H₁ ⊗ H₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    dims: HilbertDims,
}

impl StateVector {
    pub fn new(amps: Vec<C64>, dims: HilbertDims) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: dims.total(),
                actual: amps.len(),
            });
        }
        let norm_sqr = norm_sqr(&amps);
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                norm_sqr,
                tol: NORM_TOL,
            });
        }
        Ok(Self { amps, dims })
    }

    /// Scales `amps` to unit norm. Fails on the zero vector.
    pub fn normalized(mut amps: Vec<C64>, dims: HilbertDims) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: dims.total(),
                actual: amps.len(),
            });
        }
        let norm = norm_sqr(&amps).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
                tol: NORM_TOL,
            });
        }
        let inv = 1.0 / norm;
        amps.iter_mut().for_each(|a| *a *= inv);
        Ok(Self { amps, dims })
    }

    /// Basis state `|index⟩` in a space of dimension `dims.total()`.
    pub fn basis(index: usize, dims: HilbertDims) -> Result<Self> {
        if index >= dims.total() {
            return Err(Error::IndexOutOfRange {
                name: "basis index",
                index,
                bound: dims.total(),
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dims.total()];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amps, dims })
    }

    /// `ψ₁ ⊗ ψ₂` with bipartite dims `(len ψ₁, len ψ₂)`.
    pub fn product(a: &StateVector, b: &StateVector) -> Result<Self> {
        let dims = HilbertDims::new(a.len(), b.len())?;
        let amps = a
            .amps
            .iter()
            .flat_map(|x| b.amps.iter().map(move |y| x * y))
            .collect();
        Ok(Self { amps, dims })
    }

    /// Constructor for vectors produced by norm-preserving maps; skips the
    /// normalization check.
    pub(crate) fn from_unitary_image(amps: Vec<C64>, dims: HilbertDims) -> Self {
        debug_assert_eq!(amps.len(), dims.total());
        Self { amps, dims }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    /// Same amplitudes, reinterpreted on other bipartite dims of equal size.
    pub fn with_dims(&self, dims: HilbertDims) -> Result<Self> {
        if dims.total() != self.len() {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: dims.total(),
                actual: self.len(),
            });
        }
        Ok(Self {
            amps: self.amps.clone(),
            dims,
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Coefficient matrix `C[j1, j2]` (n1 × n2).
    pub fn coefficient_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dims.n1, self.dims.n2, &self.amps)
    }

    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amps)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density_matrix(&self) -> DensityMatrix {
        let v = self.to_dvector();
        DensityMatrix::from_trusted(&v * v.adjoint())
    }
}

fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Largest entrywise deviation `max |A_ij - conj(A_ji)|`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), trace (1e-12) and the smallest
    /// eigenvalue (≥ -1e-10).
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidDensityMatrix(format!(
                "expected a non-empty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let defect = hermiticity_defect(&entries);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} differs from 1"
            )));
        }
        let rho = Self { entries };
        let min = rho
            .eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "smallest eigenvalue {min:e} is negative"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_trusted(entries: DMatrix<C64>) -> Self {
        Self { entries }
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimensions("dimension must be positive".into()));
        }
        Ok(Self {
            entries: DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0)),
        })
    }

    /// Diagonal density matrix from probabilities.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(probs.len(), probs.iter().map(|&p| C64::new(p, 0.0)));
        Self::new(DMatrix::from_diagonal(&d))
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    #[default]
    Dimensionless,
    /// Energy with ħ = 1, so `E·t` is a dimensionless phase.
    Energy,
}

/// Hermitian matrix with unit metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<C64>,
    units: Units,
}

impl HermitianOperator {
    pub fn new(entries: DMatrix<C64>, units: Units) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidDimensions(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let defect = hermiticity_defect(&entries);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation: defect });
        }
        Ok(Self { entries, units })
    }

    /// Real symmetric matrix given as `f64` entries.
    pub fn from_real(entries: DMatrix<f64>, units: Units) -> Result<Self> {
        Self::new(entries.map(|x| C64::new(x, 0.0)), units)
    }

    pub fn from_diagonal(diag: &[f64], units: Units) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self {
            entries: DMatrix::from_diagonal(&d),
            units,
        }
    }

    pub fn identity(dim: usize, units: Units) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
            units,
        }
    }

    /// Symmetrizes `(A + A†)/2`; for matrices that are Hermitian up to rounding.
    pub(crate) fn from_trusted(entries: DMatrix<C64>, units: Units) -> Self {
        let sym = (&entries + entries.adjoint()) * C64::new(0.5, 0.0);
        Self {
            entries: sym,
            units,
        }
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Spectral norm (largest |eigenvalue|).
    pub fn spectral_norm(&self) -> f64 {
        self.entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: self.dim(),
                actual: state.len(),
            });
        }
        let v = state.to_dvector();
        Ok((v.adjoint() * &self.entries * &v)[(0, 0)].re)
    }

    /// Frobenius norm of `[A, B]`.
    pub fn commutator_norm(&self, other: &HermitianOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                what: "operator",
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        let c = &self.entries * &other.entries - &other.entries * &self.entries;
        Ok(c.norm())
    }
}

/// Reduced density matrix of `state` on the kept subsystem:
/// `(ρ₁)_{j1,k1} = Σ_{j2} c_{j1,j2} c*_{k1,j2}` or
/// `(ρ₂)_{j2,k2} = Σ_{j1} c_{j1,j2} c*_{j1,k2}`.
pub fn partial_trace(state: &StateVector, dims: HilbertDims, keep: Subsystem) -> Result<DensityMatrix> {
    if state.len() != dims.total() {
        return Err(Error::DimensionMismatch {
            what: "state (expected n1*n2 amplitudes)",
            expected: dims.total(),
            actual: state.len(),
        });
    }
    let (n1, n2) = (dims.n1(), dims.n2());
    let c = state.amplitudes();
    let entries = match keep {
        Subsystem::First => {
            let mut rho = DMatrix::<C64>::zeros(n1, n1);
            for j in 0..n1 {
                let row_j = &c[j * n2..(j + 1) * n2];
                for k in j..n1 {
                    let row_k = &c[k * n2..(k + 1) * n2];
                    let s: C64 = row_j.iter().zip(row_k).map(|(a, b)| a * b.conj()).sum();
                    rho[(j, k)] = s;
                    rho[(k, j)] = s.conj();
                }
                rho[(j, j)].im = 0.0;
            }
            rho
        }
        Subsystem::Second => {
            let mut rho = DMatrix::<C64>::zeros(n2, n2);
            for row in c.chunks_exact(n2) {
                for j in 0..n2 {
                    let a = row[j];
                    for k in j..n2 {
                        rho[(j, k)] += a * row[k].conj();
                    }
                }
            }
            for j in 0..n2 {
                rho[(j, j)].im = 0.0;
                for k in (j + 1)..n2 {
                    rho[(k, j)] = rho[(j, k)].conj();
                }
            }
            rho
        }
    };
    Ok(DensityMatrix::from_trusted(entries))
}

/// `tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ.
    rho.entries().iter().map(|z| z.norm_sqr()).sum()
}

/// `‖ρ − I/dim‖_F`.
pub fn distance_to_maximally_mixed(rho: &DensityMatrix) -> f64 {
    let n = rho.dim();
    let inv = 1.0 / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut z = rho.get(i, j);
            if i == j {
                z -= inv;
            }
            acc += z.norm_sqr();
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bell() -> StateVector {
        let dims = HilbertDims::new(2, 2).unwrap();
        StateVector::new(
            vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0)],
            dims,
        )
        .unwrap()
    }

    #[test]
    fn bell_state_reduces_to_half_identity() {
        let rho = partial_trace(&bell(), bell().dims(), Subsystem::First).unwrap();
        assert_abs_diff_eq!(rho.get(0, 0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.get(1, 1).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.get(0, 1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(purity(&rho), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn product_state_is_pure() {
        let d2 = HilbertDims::single(2).unwrap();
        let d3 = HilbertDims::single(3).unwrap();
        let a = StateVector::normalized(vec![c(1.0, 0.5), c(-0.3, 0.2)], d2).unwrap();
        let b = StateVector::normalized(vec![c(0.1, 0.0), c(0.0, 1.0), c(0.7, -0.4)], d3).unwrap();
        let psi = StateVector::product(&a, &b).unwrap();
        let rho = partial_trace(&psi, psi.dims(), Subsystem::First).unwrap();
        assert_abs_diff_eq!(purity(&rho), 1.0, epsilon = 1e-12);
        let expected = a.density_matrix();
        assert!((rho.entries() - expected.entries()).norm() < 1e-12);
        let rho2 = partial_trace(&psi, psi.dims(), Subsystem::Second).unwrap();
        assert!((rho2.entries() - b.density_matrix().entries()).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_names_both_values() {
        let psi = bell();
        let err = partial_trace(&psi, HilbertDims::new(3, 2).unwrap(), Subsystem::First).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                what: "state (expected n1*n2 amplitudes)",
                expected: 6,
                actual: 4
            }
        );
        assert!(err.to_string().contains('6') && err.to_string().contains('4'));
    }

    #[test]
    fn purity_examples() {
        let mixed = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(purity(&mixed), 0.5, epsilon = 1e-15);
        let pure = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(purity(&pure), 1.0, epsilon = 1e-15);
        let skew = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        assert_abs_diff_eq!(purity(&skew), 0.625, epsilon = 1e-15);
    }

    #[test]
    fn distance_examples() {
        let mm = DensityMatrix::maximally_mixed(5).unwrap();
        assert_abs_diff_eq!(distance_to_maximally_mixed(&mm), 0.0, epsilon = 1e-15);
        let pure = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(distance_to_maximally_mixed(&pure), 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        let not_herm = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(not_herm), Err(Error::NotHermitian { .. })));
        let bad_trace = DMatrix::from_diagonal_element(2, 2, c(0.6, 0.0));
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidDensityMatrix(_))));
        let negative = DMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(matches!(DensityMatrix::new(negative), Err(Error::InvalidDensityMatrix(_))));
    }

    #[test]
    fn state_validation() {
        let d = HilbertDims::single(2).unwrap();
        assert!(matches!(
            StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)], d),
            Err(Error::NotNormalized { .. })
        ));
        assert!(StateVector::normalized(vec![c(0.0, 0.0); 2], d).is_err());
        assert!(HilbertDims::new(0, 3).is_err());
    }

    #[test]
    fn keep_second_matches_transposed_first() {
        // ψ'_{j2,j1} = ψ_{j1,j2}: tracing out the other factor must swap roles.
        let dims = HilbertDims::new(3, 3).unwrap();
        let amps: Vec<C64> = (0..9).map(|i| c((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())).collect();
        let psi = StateVector::normalized(amps, dims).unwrap();
        let mut swapped = vec![c(0.0, 0.0); 9];
        for j1 in 0..3 {
            for j2 in 0..3 {
                swapped[dims.index(j2, j1)] = psi.amplitudes()[dims.index(j1, j2)];
            }
        }
        let psi_t = StateVector::new(swapped, dims).unwrap();
        let a = partial_trace(&psi, dims, Subsystem::Second).unwrap();
        let b = partial_trace(&psi_t, dims, Subsystem::First).unwrap();
        assert!((a.entries() - b.entries()).norm() < 1e-14);
    }
}
