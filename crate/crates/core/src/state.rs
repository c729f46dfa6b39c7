//! Validated density matrices and the entropic functionals built on them.
//!
//! Index convention: composite index `Σ local_k · stride_k` with the first
//! listed factor slowest (row-major Kronecker order). Every logarithm is
//! base 2, so entropies are in bits.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, entropy_of_spectrum, hermitian_eigen, hermitian_eigenvalues, hermitian_part, kron,
    max_abs, CMatrix, C64, LOG_CUTOFF,
};

/// Tolerance for Hermiticity, trace and negative eigenvalues when a state is loaded.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Hermitian, positive semidefinite, unit-trace matrix over a list of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
}

/// Eigenvalues in descending order with the matching unitary columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        &scaled * self.eigenvectors.adjoint()
    }
}

/// Checks a raw matrix against the density-matrix invariants.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero and the result is
/// renormalized; anything more negative is rejected.
pub fn validate_density(raw: CMatrix, dims: &[usize], tol: f64) -> Result<DensityMatrix> {
    check_dims(dims)?;
    let side: usize = dims.iter().product();
    if raw.nrows() != side || raw.ncols() != side {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but dims {:?} need side {}",
            raw.nrows(),
            raw.ncols(),
            dims,
            side
        )));
    }
    let deviation = linalg::max_abs_diff(&raw, &raw.adjoint());
    if deviation > tol {
        return Err(Error::NonHermitian { deviation });
    }
    let herm = hermitian_part(&raw);
    let trace = herm.trace().re;
    if (trace - 1.0).abs() > tol {
        return Err(Error::NonUnitTrace { trace });
    }
    let (values, vectors) = hermitian_eigen(&herm);
    let min = values.last().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NegativeEigenvalue { value: min });
    }
    let matrix = if min < 0.0 {
        let clamped: Vec<f64> = values.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let spectral = SpectralDecomposition {
            eigenvalues: clamped.iter().map(|l| l / total).collect(),
            eigenvectors: vectors,
        };
        hermitian_part(&spectral.reconstruct())
    } else {
        herm
    };
    Ok(DensityMatrix { dims: dims.to_vec(), matrix })
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} must be a nonempty list of positive integers"
        )));
    }
    Ok(())
}

impl DensityMatrix {
    /// Validates with the default tolerance.
    pub fn new(matrix: CMatrix, dims: &[usize]) -> Result<Self> {
        validate_density(matrix, dims, VALIDATION_TOL)
    }

    /// Wraps a matrix that is a density matrix by construction (output of a
    /// trace-preserving map on a valid state). Only the Hermitian part is kept.
    pub(crate) fn from_trusted(matrix: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.iter().product::<usize>());
        DensityMatrix { dims, matrix: hermitian_part(&matrix) }
    }

    /// Pure state `|ψ⟩⟨ψ|` from an (unnormalized) vector.
    pub fn from_pure(amplitudes: &[C64], dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        let side: usize = dims.iter().product();
        if amplitudes.len() != side {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {dims:?}",
                amplitudes.len()
            )));
        }
        let v = CMatrix::from_column_slice(side, 1, amplitudes);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::NonUnitTrace { trace: 0.0 });
        }
        let v = v.unscale(norm);
        Ok(Self::from_trusted(&v * v.adjoint(), dims.to_vec()))
    }

    /// Diagonal state in the computational basis.
    pub fn diagonal(probabilities: &[f64], dims: &[usize]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            probabilities.len(),
            probabilities.iter().map(|&p| c(p, 0.0)),
        ));
        Self::new(m, dims)
    }

    pub fn maximally_mixed(dims: &[usize]) -> Result<Self> {
        let side: usize = dims.iter().product();
        Self::diagonal(&vec![1.0 / side as f64; side], dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total dimension `∏ dims`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// The two factor dimensions of a bipartite state.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::DimensionMismatch(format!(
                "expected a bipartite state, got dims {:?}",
                self.dims
            ))),
        }
    }

    /// Same matrix, regrouped factor dimensions with the same total.
    pub fn with_dims(&self, dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        if dims.iter().product::<usize>() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot regroup {:?} as {dims:?}",
                self.dims
            )));
        }
        Ok(DensityMatrix { dims: dims.to_vec(), matrix: self.matrix.clone() })
    }

    pub fn spectrum(&self) -> SpectralDecomposition {
        let (eigenvalues, eigenvectors) = hermitian_eigen(&self.matrix);
        SpectralDecomposition { eigenvalues, eigenvectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        tensor(self, other)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// Conjugation `U ρ U†` by a unitary on the full space.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary {}x{} on a state of dimension {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        Ok(Self::from_trusted(u * &self.matrix * u.adjoint(), self.dims.clone()))
    }

    /// Convex combination `λ·self + (1−λ)·other`.
    pub fn mix(&self, other: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::OutOfRange(format!("mixing weight {lambda}")));
        }
        let m = &self.matrix * c(lambda, 0.0) + &other.matrix * c(1.0 - lambda, 0.0);
        Ok(Self::from_trusted(m, self.dims.clone()))
    }

    pub fn max_entry_distance(&self, other: &DensityMatrix) -> f64 {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// `a ⊗ b`, factor lists concatenated.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let dims = a.dims.iter().chain(&b.dims).copied().collect();
    DensityMatrix::from_trusted(kron(&a.matrix, &b.matrix), dims)
}

/// Traces out every factor not listed in `keep`; kept factors stay in their original order.
pub fn partial_trace(state: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let n = state.dims.len();
    let mut kept = vec![false; n];
    for &k in keep {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
        kept[k] = true;
    }
    let kept_dims: Vec<usize> = (0..n).filter(|&k| kept[k]).map(|k| state.dims[k]).collect();
    let kept_side: usize = kept_dims.iter().product();

    // split each composite index into (kept, traced) composite indices
    let side = state.dim();
    let mut split = Vec::with_capacity(side);
    for idx in 0..side {
        let mut rem = idx;
        let mut locals = vec![0usize; n];
        for k in (0..n).rev() {
            locals[k] = rem % state.dims[k];
            rem /= state.dims[k];
        }
        let (mut ki, mut ti) = (0usize, 0usize);
        for k in 0..n {
            if kept[k] {
                ki = ki * state.dims[k] + locals[k];
            } else {
                ti = ti * state.dims[k] + locals[k];
            }
        }
        split.push((ki, ti));
    }
    let mut out = CMatrix::zeros(kept_side, kept_side);
    for i in 0..side {
        let (ki, ti) = split[i];
        for j in 0..side {
            let (kj, tj) = split[j];
            if ti == tj {
                out[(ki, kj)] += state.matrix[(i, j)];
            }
        }
    }
    Ok(DensityMatrix::from_trusted(out, kept_dims))
}

/// `S(ρ) = −Tr ρ log₂ ρ` in bits.
pub fn von_neumann_entropy(state: &DensityMatrix) -> f64 {
    entropy_of_spectrum(state.eigenvalues()).max(0.0)
}

/// `S(ρ‖σ) = Tr ρ log₂ ρ − Tr ρ log₂ σ` in bits.
///
/// Returns [`Error::SupportViolation`] (the infinite divergence) when σ has a
/// null direction carrying more than `1e-9` of ρ's weight.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy between dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let sig = sigma.spectrum();
    let mut cross = 0.0;
    let mut null_weight = 0.0;
    for (k, &s) in sig.eigenvalues.iter().enumerate() {
        let w = sig.eigenvectors.column(k);
        let weight = (w.adjoint() * rho.matrix() * w)[(0, 0)].re;
        if s > LOG_CUTOFF {
            cross += weight * s.log2();
        } else {
            null_weight += weight.max(0.0);
        }
    }
    if null_weight > VALIDATION_TOL {
        return Err(Error::SupportViolation);
    }
    Ok(-von_neumann_entropy(rho) - cross)
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    // ‖√ρ √σ‖₁ through PSD factors, which keeps rank-deficient inputs accurate
    let overlap = linalg::psd_factor(rho.matrix()).adjoint() * linalg::psd_factor(sigma.matrix());
    let s = linalg::nuclear_norm(&overlap);
    Ok((s * s).clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// File format

/// On-disk representation: `{"dims": [..], "matrix": [[[re, im], ..], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

pub(crate) fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn pairs_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(CMatrix::from_fn(n, cols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

impl StateFile {
    pub fn from_state(state: &DensityMatrix) -> Self {
        StateFile { dims: state.dims.clone(), matrix: matrix_to_pairs(&state.matrix) }
    }

    pub fn into_state(self) -> Result<DensityMatrix> {
        let m = pairs_to_matrix(&self.matrix)?;
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!("matrix is {}x{}", m.nrows(), m.ncols())));
        }
        DensityMatrix::new(m, &self.dims)
    }
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_state()
}

pub fn state_to_string(state: &DensityMatrix) -> String {
    serde_json::to_string(&StateFile::from_state(state)).expect("state serializes")
}

pub fn read_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    parse_state(&std::fs::read_to_string(path)?)
}

pub fn write_state(path: impl AsRef<Path>, state: &DensityMatrix) -> Result<()> {
    std::fs::write(path, state_to_string(state) + "\n")?;
    Ok(())
}

/// Largest entry magnitude of `ρ − ρ†`; zero for stored states.
pub fn hermiticity_defect(state: &DensityMatrix) -> f64 {
    max_abs(&(state.matrix() - state.matrix().adjoint()))
}
