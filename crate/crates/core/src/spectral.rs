use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{HermitianOperator, Units};
use crate::C64;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
    units: Units,
}

impl SpectralDecomposition {
    pub fn of(op: &HermitianOperator) -> Self {
        let eig = op.entries().clone().symmetric_eigen();
        let n = op.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut eigenvectors = DMatrix::<C64>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self {
            eigenvalues,
            eigenvectors,
            units: op.units(),
        }
    }

    /// Builds a decomposition from given eigenpairs; values must be sorted
    /// ascending and columns orthonormal within 1e-10.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DMatrix<C64>, units: Units) -> Result<Self> {
        if eigenvectors.nrows() != eigenvalues.len() || !eigenvectors.is_square() {
            return Err(Error::DimensionMismatch {
                what: "eigenvector matrix",
                expected: eigenvalues.len(),
                actual: eigenvectors.ncols(),
            });
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter {
                name: "eigenvalues",
                reason: "must be sorted ascending".into(),
            });
        }
        let s = Self {
            eigenvalues,
            eigenvectors,
            units,
        };
        let defect = s.orthonormality_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidParameter {
                name: "eigenvectors",
                reason: format!("not orthonormal (defect {defect:e})"),
            });
        }
        Ok(s)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, n: usize) -> DVector<C64> {
        self.eigenvectors.column(n).into_owned()
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max_n ‖H v_n − E_n v_n‖`.
    pub fn residual(&self, op: &HermitianOperator) -> f64 {
        (0..self.dim())
            .map(|n| {
                let v = self.eigenvectors.column(n);
                (op.entries() * v - v * C64::new(self.eigenvalues[n], 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max |V†V − I|` entrywise.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.eigenvectors.adjoint() * &self.eigenvectors;
        let n = g.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_accurate() {
        let h = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let op = HermitianOperator::from_real(h, Units::Energy).unwrap();
        let s = SpectralDecomposition::of(&op);
        let r2 = 2f64.sqrt();
        let expected = [2.0 - r2, 2.0, 2.0 + r2];
        for (a, b) in s.eigenvalues().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(s.residual(&op) < 1e-12);
        assert!(s.orthonormality_defect() < 1e-12);
        assert_eq!(s.units(), Units::Energy);
    }

    #[test]
    fn from_parts_rejects_unsorted() {
        let v = DMatrix::<C64>::identity(2, 2);
        assert!(SpectralDecomposition::from_parts(vec![1.0, 0.0], v.clone(), Units::Energy).is_err());
        assert!(SpectralDecomposition::from_parts(vec![0.0, 1.0], v, Units::Energy).is_ok());
    }
}
