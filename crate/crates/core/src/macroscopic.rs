//! Coarse-grained observables, energy shells and macro partitions.
//!
//! A coarse-grained operator keeps the eigenvectors of the original and
//! replaces every eigenvalue by the arithmetic mean of its band. An energy
//! shell is the span of Hamiltonian eigenvectors with eigenvalues in
//! `[lo, hi)`. A macro partition splits the shell into mutually orthogonal
//! cells `P_ν` with `Σ_ν d_ν = D`; projectors are stored in shell
//! coordinates (the Hamiltonian eigenbasis restricted to the shell), so
//! `(P_ν)_{mn} = ⟨φ_m|P_ν|φ_n⟩`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{HermitianOperator, Units};
use crate::spectral::SpectralDecomposition;
use crate::C64;

/// Distance to a band edge below which a tie warning is recorded.
pub const EDGE_TIE_TOL: f64 = 1e-10;
/// Commutation tolerance between an observable and the shell projector.
pub const SHELL_COMMUTE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum BandSpec {
    /// Uniform bands of this width starting at the smallest eigenvalue.
    Width(f64),
    /// Explicit, strictly increasing band boundaries.
    Edges(Vec<f64>),
}

/// Concrete band boundaries. Value `x` falls in band `i` when
/// `edges[i] < x ≤ edges[i+1]`; band 0 also includes `x = edges[0]`, so ties
/// go to the lower band.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedBands {
    pub edges: Vec<f64>,
}

impl BandSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            BandSpec::Width(w) => {
                if !(*w > 0.0) || !w.is_finite() {
                    return Err(Error::InvalidBands(format!("width must be positive, got {w}")));
                }
            }
            BandSpec::Edges(e) => {
                if e.len() < 2 {
                    return Err(Error::InvalidBands("need at least two edges".into()));
                }
                if e.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidBands("edges must be strictly increasing".into()));
                }
            }
        }
        Ok(())
    }

    /// Fixes the boundaries for a given spectrum.
    pub fn resolve(&self, values: &[f64]) -> Result<ResolvedBands> {
        self.validate()?;
        match self {
            BandSpec::Edges(e) => Ok(ResolvedBands { edges: e.clone() }),
            BandSpec::Width(w) => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if values.is_empty() || !(hi > lo) {
                    return Err(Error::InvalidBands(format!(
                        "empty spectrum range [{lo}, {hi}] cannot be split into bands of width {w}"
                    )));
                }
                let n = (((hi - lo) / w).ceil() as usize).max(1);
                let mut edges: Vec<f64> = (0..=n).map(|i| lo + i as f64 * w).collect();
                if edges[n] < hi {
                    edges.push(lo + (n + 1) as f64 * w);
                }
                Ok(ResolvedBands { edges })
            }
        }
    }
}

impl ResolvedBands {
    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Band index of `x`, or an error if `x` lies outside all bands.
    pub fn assign(&self, x: f64) -> Result<usize> {
        let e = &self.edges;
        if x < e[0] || x > e[e.len() - 1] {
            return Err(Error::InvalidBands(format!(
                "value {x} lies outside the bands [{}, {}]",
                e[0],
                e[e.len() - 1]
            )));
        }
        // First interior edge with x <= edge; ties stay in the lower band.
        let i = e[1..].partition_point(|edge| *edge < x);
        Ok(i.min(self.len() - 1))
    }

    /// Interior or outer edge within `EDGE_TIE_TOL` of `x`, if any.
    pub fn near_edge(&self, x: f64) -> Option<f64> {
        self.edges.iter().copied().find(|e| (x - e).abs() < EDGE_TIE_TOL)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub mean: f64,
    /// Indices into the ascending eigenvalue list of the original operator.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroOperator {
    pub original: HermitianOperator,
    pub spectral: SpectralDecomposition,
    pub bands: Vec<Band>,
    pub coarse: HermitianOperator,
}

impl MacroOperator {
    /// Coarse eigenvalue for each eigenvector of the original (ascending order).
    pub fn coarse_eigenvalues(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.spectral.dim()];
        for b in &self.bands {
            for &m in &b.members {
                out[m] = b.mean;
            }
        }
        out
    }
}

/// Replaces each eigenvalue of `op` by the mean of its band. Empty bands are
/// dropped.
pub fn coarse_grain(op: &HermitianOperator, spec: &BandSpec) -> Result<MacroOperator> {
    let spectral = SpectralDecomposition::of(op);
    let resolved = spec.resolve(spectral.eigenvalues())?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); resolved.len()];
    for (n, &e) in spectral.eigenvalues().iter().enumerate() {
        members[resolved.assign(e)?].push(n);
    }
    let bands: Vec<Band> = members
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(|m| {
            let mean = m.iter().map(|&n| spectral.eigenvalues()[n]).sum::<f64>() / m.len() as f64;
            Band { mean, members: m }
        })
        .collect();
    let mut coarse_diag = vec![0.0; spectral.dim()];
    for b in &bands {
        for &n in &b.members {
            coarse_diag[n] = b.mean;
        }
    }
    let v = spectral.eigenvectors();
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        coarse_diag.len(),
        coarse_diag.iter().map(|&x| C64::new(x, 0.0)),
    ));
    let coarse = HermitianOperator::from_trusted(v * d * v.adjoint(), op.units());
    Ok(MacroOperator {
        original: op.clone(),
        spectral,
        bands,
        coarse,
    })
}

/// Span of the Hamiltonian eigenvectors with energies in `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyShell {
    pub lo: f64,
    pub hi: f64,
    /// Indices into the full ascending spectrum.
    pub indices: Vec<usize>,
    pub energies: Vec<f64>,
    /// Full-space eigenvectors as columns (N × D).
    pub vectors: DMatrix<C64>,
}

impl EnergyShell {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// `V† A V`.
    pub fn compress(&self, op: &HermitianOperator) -> Result<DMatrix<C64>> {
        if op.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                what: "observable",
                expected: self.ambient_dim(),
                actual: op.dim(),
            });
        }
        Ok(self.vectors.adjoint() * op.entries() * &self.vectors)
    }
}

pub fn energy_shell(spec: &SpectralDecomposition, lo: f64, hi: f64) -> Result<EnergyShell> {
    if !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "shell",
            reason: format!("need lo < hi, got [{lo}, {hi})"),
        });
    }
    let ev = spec.eigenvalues();
    let indices: Vec<usize> = (0..ev.len()).filter(|&n| ev[n] >= lo && ev[n] < hi).collect();
    if indices.is_empty() {
        let below = ev.iter().copied().filter(|&e| e < lo).last();
        let above = ev.iter().copied().find(|&e| e >= hi);
        return Err(Error::EmptyShell { lo, hi, below, above });
    }
    let vectors = spec.eigenvectors().select_columns(indices.iter());
    Ok(EnergyShell {
        lo,
        hi,
        energies: indices.iter().map(|&n| ev[n]).collect(),
        indices,
        vectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompressionMode {
    /// The observable commuted with the shell projector within tolerance.
    Commuting,
    /// The observable was projected into the shell and re-diagonalized.
    Compressed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroCell {
    pub label: String,
    /// Band mean of each observable defining the cell.
    pub values: Vec<f64>,
    /// Orthonormal basis of the cell in shell coordinates (D × d).
    pub basis: DMatrix<C64>,
    /// `P_ν = B B†` in shell coordinates (D × D).
    pub projector: DMatrix<C64>,
}

impl MacroCell {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroPartition {
    pub shell: EnergyShell,
    pub cells: Vec<MacroCell>,
    pub mode: CompressionMode,
    /// Resolved band edges per observable.
    pub band_edges: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl MacroPartition {
    /// Shell dimension `D`.
    pub fn shell_dim(&self) -> usize {
        self.shell.dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cells.iter().map(MacroCell::dim).collect()
    }

    /// `d_ν / D` per cell.
    pub fn targets(&self) -> Vec<f64> {
        let d = self.shell_dim() as f64;
        self.cells.iter().map(|c| c.dim() as f64 / d).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.cells.iter().map(|c| c.label.clone()).collect()
    }

    /// Trivial partition with the whole shell as one cell.
    pub fn single_cell(shell: EnergyShell) -> Self {
        let d = shell.dim();
        let basis = DMatrix::<C64>::identity(d, d);
        Self {
            cells: vec![MacroCell {
                label: "all".into(),
                values: vec![],
                projector: basis.clone(),
                basis,
            }],
            shell,
            mode: CompressionMode::Commuting,
            band_edges: vec![],
            warnings: vec![],
        }
    }

    /// Same cells in the order given by `order`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.cells.len()];
        if order.len() != self.cells.len() || order.iter().any(|&i| i >= seen.len() || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: "must be a permutation of the cell indices".into(),
            });
        }
        let mut out = self.clone();
        out.cells = order.iter().map(|&i| self.cells[i].clone()).collect();
        Ok(out)
    }

    /// Largest violation of `P_ν P_μ = δ_{νμ} P_ν` and of `Σ_ν P_ν = I`.
    pub fn projector_defects(&self) -> (f64, f64) {
        let d = self.shell_dim();
        let mut algebra = 0.0f64;
        for (i, a) in self.cells.iter().enumerate() {
            for (j, b) in self.cells.iter().enumerate() {
                let prod = &a.projector * &b.projector;
                let target = if i == j { a.projector.clone() } else { DMatrix::zeros(d, d) };
                algebra = algebra.max((prod - target).camax());
            }
        }
        let mut sum = DMatrix::<C64>::zeros(d, d);
        for c in &self.cells {
            sum += &c.projector;
        }
        let completeness = (sum - DMatrix::<C64>::identity(d, d)).camax();
        (algebra, completeness)
    }

    /// Projector `P_ν` lifted to the ambient space: `V P_ν V†`.
    pub fn ambient_projector(&self, cell: usize) -> HermitianOperator {
        let v = &self.shell.vectors;
        HermitianOperator::from_trusted(v * &self.cells[cell].projector * v.adjoint(), Units::Dimensionless)
    }
}

fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let op = HermitianOperator::from_trusted(m.clone(), Units::Dimensionless);
    let s = SpectralDecomposition::of(&op);
    (s.eigenvalues().to_vec(), s.eigenvectors().clone())
}

/// Splits the shell into eigenspace bands of the shell-compressed
/// `observable`.
pub fn build_macro_partition(shell: &EnergyShell, observable: &HermitianOperator, spec: &BandSpec) -> Result<MacroPartition> {
    build_joint_partition(shell, &[(observable, spec)])
}

/// Joint cells of several observables, obtained by successive refinement:
/// each cell of the partition built from the first `k` observables is split
/// into eigenspace bands of observable `k+1` compressed to that cell. The
/// compressed observables must leave every intermediate cell invariant
/// (they commute within the shell), otherwise [`Error::NonCommuting`].
pub fn build_joint_partition(shell: &EnergyShell, observables: &[(&HermitianOperator, &BandSpec)]) -> Result<MacroPartition> {
    if observables.is_empty() {
        return Ok(MacroPartition::single_cell(shell.clone()));
    }
    let d = shell.dim();
    let mut mode = CompressionMode::Commuting;
    let mut warnings = Vec::new();
    let mut band_edges = Vec::new();

    struct Proto {
        label: Vec<usize>,
        values: Vec<f64>,
        basis: DMatrix<C64>,
    }
    let mut cells = vec![Proto {
        label: vec![],
        values: vec![],
        basis: DMatrix::<C64>::identity(d, d),
    }];

    for (k, (obs, spec)) in observables.iter().enumerate() {
        let compressed = shell.compress(obs)?;
        let leak = (obs.entries() * &shell.vectors - &shell.vectors * &compressed).norm();
        if leak > SHELL_COMMUTE_TOL {
            mode = CompressionMode::Compressed;
        }
        let compressed = (&compressed + compressed.adjoint()) * C64::new(0.5, 0.0);
        let (all_values, _) = hermitian_eigen(&compressed);
        let resolved = spec.resolve(&all_values)?;

        let mut next = Vec::new();
        for cell in &cells {
            let b = &cell.basis;
            let local = b.adjoint() * &compressed * b;
            if k > 0 {
                let off = (&compressed * b - b * &local).norm();
                if off > SHELL_COMMUTE_TOL * compressed.norm().max(1.0) {
                    return Err(Error::NonCommuting { norm: off });
                }
            }
            let (vals, vecs) = hermitian_eigen(&local);
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); resolved.len()];
            for (i, &x) in vals.iter().enumerate() {
                if let Some(edge) = resolved.near_edge(x) {
                    warnings.push(format!(
                        "observable {k}: eigenvalue {x:.17e} within {EDGE_TIE_TOL:e} of band edge {edge}; assigned to lower band"
                    ));
                }
                groups[resolved.assign(x)?].push(i);
            }
            for (band, members) in groups.into_iter().enumerate() {
                if members.is_empty() {
                    continue;
                }
                let sub = vecs.select_columns(members.iter());
                let mean = members.iter().map(|&i| vals[i]).sum::<f64>() / members.len() as f64;
                let mut label = cell.label.clone();
                label.push(band);
                let mut values = cell.values.clone();
                values.push(mean);
                next.push(Proto {
                    label,
                    values,
                    basis: b * sub,
                });
            }
        }
        next.sort_by(|a, b| a.label.cmp(&b.label));
        cells = next;
        band_edges.push(resolved.edges);
    }

    let cells = cells
        .into_iter()
        .map(|p| {
            let projector = &p.basis * p.basis.adjoint();
            MacroCell {
                label: p.label.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("."),
                values: p.values,
                basis: p.basis,
                projector,
            }
        })
        .collect();
    Ok(MacroPartition {
        shell: shell.clone(),
        cells,
        mode,
        band_edges,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_op(values: &[f64]) -> HermitianOperator {
        HermitianOperator::from_diagonal(values, Units::Energy)
    }

    /// Random real rotation of a diagonal operator, so eigenvectors are not
    /// the standard basis.
    fn rotated(values: &[f64]) -> HermitianOperator {
        let n = values.len();
        let mut m = DMatrix::<f64>::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64).sin());
        m = &m + m.transpose();
        let q = m.symmetric_eigen().eigenvectors;
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(values));
        HermitianOperator::from_real(&q * d * q.transpose(), Units::Energy).unwrap()
    }

    #[test]
    fn band_assignment_ties_go_low() {
        let r = BandSpec::Edges(vec![0.0, 2.0, 6.0]).resolve(&[]).unwrap();
        assert_eq!(r.assign(0.0).unwrap(), 0);
        assert_eq!(r.assign(2.0).unwrap(), 0);
        assert_eq!(r.assign(2.0 + 1e-12).unwrap(), 1);
        assert_eq!(r.assign(6.0).unwrap(), 1);
        assert!(r.assign(6.1).is_err());
        assert!(BandSpec::Edges(vec![1.0, 1.0]).validate().is_err());
        assert!(BandSpec::Width(0.0).validate().is_err());
    }

    #[test]
    fn coarse_grain_two_bands() {
        let op = rotated(&[1.0, 1.1, 5.0, 5.2]);
        let m = coarse_grain(&op, &BandSpec::Edges(vec![0.0, 2.0, 6.0])).unwrap();
        assert_eq!(m.bands.len(), 2);
        assert!((m.bands[0].mean - 1.05).abs() < 1e-12);
        assert!((m.bands[1].mean - 5.1).abs() < 1e-12);
        assert_eq!(m.bands[0].members.len(), 2);
        assert_eq!(m.bands[1].members.len(), 2);
        let ev = SpectralDecomposition::of(&m.coarse);
        let expected = [1.05, 1.05, 5.1, 5.1];
        for (a, b) in ev.eigenvalues().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_band_gives_scaled_identity() {
        let op = rotated(&[0.3, 1.0, 2.5, 4.0, 4.1]);
        let m = coarse_grain(&op, &BandSpec::Edges(vec![0.0, 10.0])).unwrap();
        let expect = DMatrix::<C64>::identity(5, 5) * C64::new(op.trace() / 5.0, 0.0);
        assert!((m.coarse.entries() - expect).camax() < 1e-12);
    }

    #[test]
    fn degenerate_operator_is_fixed_point() {
        let op = rotated(&[1.0, 1.0, 3.0, 3.0, 3.0]);
        let m = coarse_grain(&op, &BandSpec::Edges(vec![0.0, 2.0, 4.0])).unwrap();
        assert!((m.coarse.entries() - op.entries()).camax() < 1e-12);
    }

    #[test]
    fn coarse_graining_is_idempotent() {
        let spec = BandSpec::Edges(vec![-1.0, 0.5, 2.0, 3.3]);
        let op = rotated(&[-0.5, 0.1, 0.4, 1.2, 1.9, 2.9, 3.2]);
        let once = coarse_grain(&op, &spec).unwrap();
        let twice = coarse_grain(&once.coarse, &spec).unwrap();
        assert!((once.coarse.entries() - twice.coarse.entries()).camax() < 1e-12);
    }

    #[test]
    fn width_spec_on_flat_spectrum_errors() {
        let op = diag_op(&[2.0, 2.0, 2.0]);
        assert!(matches!(coarse_grain(&op, &BandSpec::Width(0.5)), Err(Error::InvalidBands(_))));
    }

    #[test]
    fn width_spec_covers_spectrum() {
        let op = diag_op(&[0.0, 0.4, 1.0, 1.05, 2.0]);
        let m = coarse_grain(&op, &BandSpec::Width(0.5)).unwrap();
        let total: usize = m.bands.iter().map(|b| b.members.len()).sum();
        assert_eq!(total, 5);
        // [0,0.5] -> {0, 0.4}; (0.5,1] -> {1.0}; (1,1.5] -> {1.05}; (1.5,2] -> {2.0}
        let sizes: Vec<usize> = m.bands.iter().map(|b| b.members.len()).collect();
        assert_eq!(sizes, vec![2, 1, 1, 1]);
    }

    #[test]
    fn shell_selection_and_empty_shell() {
        let h = diag_op(&[0.0, 1.0, 2.0, 3.0]);
        let s = SpectralDecomposition::of(&h);
        assert_eq!(energy_shell(&s, -1.0, 10.0).unwrap().dim(), 4);
        let mid = energy_shell(&s, 1.0, 3.0).unwrap();
        assert_eq!(mid.indices, vec![1, 2]);
        match energy_shell(&s, 1.2, 1.8) {
            Err(Error::EmptyShell { below, above, .. }) => {
                assert_eq!(below, Some(1.0));
                assert_eq!(above, Some(2.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identity_observable_gives_single_cell() {
        let h = rotated(&[0.0, 0.5, 1.0, 1.7, 2.0, 3.0]);
        let shell = energy_shell(&SpectralDecomposition::of(&h), 0.2, 2.5).unwrap();
        let p = build_macro_partition(&shell, &HermitianOperator::identity(6, Units::Dimensionless), &BandSpec::Edges(vec![0.0, 2.0])).unwrap();
        assert_eq!(p.cells.len(), 1);
        assert_eq!(p.cells[0].dim(), shell.dim());
        assert_eq!(p.mode, CompressionMode::Commuting);
    }

    #[test]
    fn compressed_partition_satisfies_projector_algebra() {
        let h = rotated(&[0.0, 0.5, 1.0, 1.7, 2.0, 3.0, 3.5, 4.0]);
        let shell = energy_shell(&SpectralDecomposition::of(&h), 0.2, 3.8).unwrap();
        let x = diag_op(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let p = build_macro_partition(&shell, &x, &BandSpec::Edges(vec![-0.5, 2.5, 4.5, 7.5])).unwrap();
        assert_eq!(p.mode, CompressionMode::Compressed);
        assert_eq!(p.dims().iter().sum::<usize>(), shell.dim());
        let (alg, comp) = p.projector_defects();
        assert!(alg < 1e-10 && comp < 1e-10);
        for c in &p.cells {
            let tr = c.projector.trace().re;
            assert!((tr - c.dim() as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn near_edge_eigenvalue_warns() {
        let h = diag_op(&[0.0, 1.0, 2.0]);
        let shell = energy_shell(&SpectralDecomposition::of(&h), -1.0, 3.0).unwrap();
        let p = build_macro_partition(&shell, &h, &BandSpec::Edges(vec![-0.5, 1.0, 2.5])).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(p.dims(), vec![2, 1]);
    }

    #[test]
    fn non_commuting_refinement_rejected() {
        let h = diag_op(&[0.0, 0.1, 0.2, 0.3]);
        let shell = energy_shell(&SpectralDecomposition::of(&h), -1.0, 1.0).unwrap();
        let a = diag_op(&[0.0, 0.0, 1.0, 1.0]);
        let b = rotated(&[0.0, 0.0, 1.0, 1.0]);
        let ea = BandSpec::Edges(vec![-0.5, 0.5, 1.5]);
        let err = build_joint_partition(&shell, &[(&a, &ea), (&b, &ea)]).unwrap_err();
        assert!(matches!(err, Error::NonCommuting { .. }));
    }

    #[test]
    fn permutation_validation() {
        let h = diag_op(&[0.0, 1.0, 2.0]);
        let shell = energy_shell(&SpectralDecomposition::of(&h), -1.0, 3.0).unwrap();
        let p = build_macro_partition(&shell, &h, &BandSpec::Edges(vec![-0.5, 0.5, 1.5, 2.5])).unwrap();
        assert!(p.permuted(&[2, 0, 1]).is_ok());
        assert!(p.permuted(&[0, 0, 1]).is_err());
        assert!(p.permuted(&[0, 1]).is_err());
    }
}
