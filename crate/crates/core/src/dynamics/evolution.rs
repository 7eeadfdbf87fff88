use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::spectral::SpectralDecomposition;
use crate::C64;

/// `Ψ(t) = Σ_n e^{−i E_n t} ⟨φ_n|Ψ₀⟩ φ_n` (ħ = 1).
pub fn evolve(state0: &StateVector, spec: &SpectralDecomposition, t: f64) -> Result<StateVector> {
    if state0.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            what: "state",
            expected: spec.dim(),
            actual: state0.len(),
        });
    }
    if t == 0.0 {
        return Ok(state0.clone());
    }
    let v = spec.eigenvectors();
    let mut coeffs = v.ad_mul(&state0.to_dvector());
    for (c, &e) in coeffs.iter_mut().zip(spec.eigenvalues()) {
        *c *= C64::from_polar(1.0, -e * t);
    }
    let out: DVector<C64> = v * coeffs;
    Ok(StateVector::from_unitary_image(out.iter().copied().collect(), state0.dims()))
}

/// Energy-basis coefficients `⟨φ_n|Ψ⟩`.
pub fn energy_coefficients(state: &StateVector, spec: &SpectralDecomposition) -> Result<Vec<C64>> {
    if state.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            what: "state",
            expected: spec.dim(),
            actual: state.len(),
        });
    }
    Ok(spec.eigenvectors().ad_mul(&state.to_dvector()).iter().copied().collect())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NondegeneracyReport {
    /// Level pairs `(m, n)`, `m < n`, with `|E_n − E_m| < tol`.
    pub degenerate_levels: Vec<(usize, usize)>,
    /// Pairs of distinct gaps `((m, n), (p, q))` with
    /// `|(E_n − E_m) − (E_q − E_p)| < tol`.
    pub degenerate_gaps: Vec<((usize, usize), (usize, usize))>,
    /// Smallest level spacing.
    pub min_level_spacing: f64,
    /// Smallest difference between two distinct gaps.
    pub min_gap_difference: f64,
}

impl NondegeneracyReport {
    pub fn holds(&self) -> bool {
        self.degenerate_levels.is_empty() && self.degenerate_gaps.is_empty()
    }
}

/// Checks sorted `levels` for degenerate levels and degenerate gaps.
///
/// Gaps are `E_n − E_m` over pairs `m < n`. Sorting the gaps lets every
/// coincidence be found by a forward scan, `O(G log G + hits)` for `G` gaps.
pub fn check_nondegeneracy(levels: &[f64], tol: f64) -> NondegeneracyReport {
    let n = levels.len();
    let mut report = NondegeneracyReport {
        min_level_spacing: f64::INFINITY,
        min_gap_difference: f64::INFINITY,
        ..Default::default()
    };
    for m in 0..n {
        for k in (m + 1)..n {
            let d = (levels[k] - levels[m]).abs();
            if d < tol {
                report.degenerate_levels.push((m, k));
            }
        }
        if m + 1 < n {
            report.min_level_spacing = report.min_level_spacing.min((levels[m + 1] - levels[m]).abs());
        }
    }
    let mut gaps: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for m in 0..n {
        for k in (m + 1)..n {
            gaps.push((levels[k] - levels[m], m, k));
        }
    }
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    for i in 0..gaps.len() {
        if i + 1 < gaps.len() {
            report.min_gap_difference = report.min_gap_difference.min(gaps[i + 1].0 - gaps[i].0);
        }
        for j in (i + 1)..gaps.len() {
            if gaps[j].0 - gaps[i].0 >= tol {
                break;
            }
            report
                .degenerate_gaps
                .push(((gaps[i].1, gaps[i].2), (gaps[j].1, gaps[j].2)));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{HermitianOperator, HilbertDims, Units};
    use crate::sampler::{sample_uniform_state, SeededStream};
    use nalgebra::DMatrix;

    #[test]
    fn arithmetic_progression_has_equal_gaps() {
        let r = check_nondegeneracy(&[0.0, 1.0, 2.0, 4.0], 1e-9);
        assert!(r.degenerate_levels.is_empty());
        assert!(!r.degenerate_gaps.is_empty());
        assert!(r.degenerate_gaps.contains(&((0, 1), (1, 2))) || r.degenerate_gaps.contains(&((1, 2), (0, 1))));
        assert!(!r.holds());
    }

    #[test]
    fn distinct_gaps() {
        let r = check_nondegeneracy(&[0.0, 1.0, 3.0, 7.0], 1e-9);
        assert!(r.holds());
        assert_eq!(r.min_level_spacing, 1.0);
        assert_eq!(r.min_gap_difference, 1.0);
    }

    #[test]
    fn repeated_level() {
        let r = check_nondegeneracy(&[0.0, 0.5, 0.5, 2.0], 1e-9);
        assert_eq!(r.degenerate_levels, vec![(1, 2)]);
    }

    #[test]
    fn zero_time_is_identity() {
        let h = DMatrix::from_fn(5, 5, |i, j| ((i + 2 * j) as f64).cos() + ((j + 2 * i) as f64).cos());
        let spec = SpectralDecomposition::of(&HermitianOperator::from_real(h, Units::Energy).unwrap());
        let psi = sample_uniform_state(5, SeededStream::new(1, 1)).unwrap();
        assert_eq!(evolve(&psi, &spec, 0.0).unwrap(), psi);
        assert!(evolve(&sample_uniform_state(4, SeededStream::new(1, 1)).unwrap(), &spec, 1.0).is_err());
    }

    #[test]
    fn eigenstate_is_stationary() {
        let h = DMatrix::from_fn(6, 6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let spec = SpectralDecomposition::of(&HermitianOperator::from_real(h, Units::Energy).unwrap());
        let amps: Vec<C64> = spec.eigenvector(2).iter().copied().collect();
        let psi = StateVector::normalized(amps, HilbertDims::single(6).unwrap()).unwrap();
        for t in [0.3, 7.0, 1234.5] {
            let out = evolve(&psi, &spec, t).unwrap();
            let overlap = psi.inner(&out).unwrap().norm();
            assert!((overlap - 1.0).abs() < 1e-12);
        }
    }
}
