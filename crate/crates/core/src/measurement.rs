//! Von Neumann measurements on one factor of a composite system, the
//! apparatus coupling that realizes them unitarily, Naimark embedding for
//! POVMs and sequential measurements on a split subsystem.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, embed_local, identity, unitarity_defect, CMatrix};
use crate::state::{matrix_to_pairs, pairs_to_matrix, DensityMatrix, VALIDATION_TOL};

/// Outcomes with probability at or below this are treated as null.
pub const NULL_OUTCOME: f64 = 1e-12;

/// Orthonormal basis `{|i⟩}` of one subsystem, stored as the columns of a
/// unitary matrix. The rank-one projectors are `Π_i = |i⟩⟨i|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveBasis {
    vectors: CMatrix,
}

impl ProjectiveBasis {
    pub fn new(vectors: CMatrix) -> Result<Self> {
        if vectors.nrows() != vectors.ncols() || vectors.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "basis matrix must be square and nonempty, got {}x{}",
                vectors.nrows(),
                vectors.ncols()
            )));
        }
        let deviation = unitarity_defect(&vectors);
        if deviation > VALIDATION_TOL {
            return Err(Error::NonOrthonormal { deviation });
        }
        Ok(ProjectiveBasis { vectors })
    }

    pub(crate) fn from_unitary(vectors: CMatrix) -> Self {
        debug_assert!(unitarity_defect(&vectors) < 1e-8);
        ProjectiveBasis { vectors }
    }

    pub fn computational(d: usize) -> Self {
        ProjectiveBasis { vectors: identity(d) }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Basis vectors as columns.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn projector(&self, i: usize) -> CMatrix {
        let v = self.vectors.column(i);
        v * v.adjoint()
    }

    /// `⊗_k parts[k]`, first part slowest.
    pub fn product(parts: &[ProjectiveBasis]) -> Self {
        let vectors = parts
            .iter()
            .fold(identity(1), |acc, b| linalg::kron(&acc, &b.vectors));
        ProjectiveBasis { vectors }
    }

    /// Direct sum with the computational basis of the complement, so the
    /// first `dim()` vectors span the original subspace.
    pub fn embedded(&self, extended_dim: usize) -> Result<Self> {
        let d = self.dim();
        if extended_dim < d {
            return Err(Error::InvalidDimension(format!("cannot embed dimension {d} into {extended_dim}")));
        }
        let mut v = identity(extended_dim);
        v.view_mut((0, 0), (d, d)).copy_from(&self.vectors);
        Ok(ProjectiveBasis { vectors: v })
    }

    /// The basis `{U|i⟩}`.
    pub fn rotated(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("rotation does not match basis dimension".into()));
        }
        Self::new(u * &self.vectors)
    }

    /// Order-insensitive distance between the projector sets.
    pub fn projector_distance(&self, other: &ProjectiveBasis) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (0..self.dim())
            .map(|i| {
                let p = self.projector(i);
                (0..other.dim())
                    .map(|j| linalg::max_abs_diff(&p, &other.projector(j)))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Columns in the shared `[re, im]` pair format.
    pub fn to_columns(&self) -> Vec<Vec<[f64; 2]>> {
        matrix_to_pairs(&self.vectors.transpose())
    }

    pub fn from_columns(columns: &[Vec<[f64; 2]>]) -> Result<Self> {
        Self::new(pairs_to_matrix(columns)?.transpose())
    }
}

impl Serialize for ProjectiveBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_columns().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjectiveBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cols = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        ProjectiveBasis::from_columns(&cols).map_err(serde::de::Error::custom)
    }
}

/// One branch of a projective measurement: `p_i` and `Π_i ρ Π_i / p_i`.
/// Null outcomes carry no state.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub probability: f64,
    pub state: Option<DensityMatrix>,
}

fn check_factor(state: &DensityMatrix, basis: &ProjectiveBasis, subsystem: usize) -> Result<()> {
    let dims = state.dims();
    if subsystem >= dims.len() {
        return Err(Error::IndexOutOfRange { index: subsystem, len: dims.len() });
    }
    if dims[subsystem] != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "basis of dimension {} on factor {subsystem} of dims {dims:?}",
            basis.dim()
        )));
    }
    Ok(())
}

/// `Σ_i (Π_i ⊗ 1) ρ (Π_i ⊗ 1)` with the projectors acting on factor `subsystem`.
pub fn apply_projective(
    state: &DensityMatrix,
    basis: &ProjectiveBasis,
    subsystem: usize,
) -> Result<DensityMatrix> {
    check_factor(state, basis, subsystem)?;
    let dims = state.dims();
    let stride: usize = dims[subsystem + 1..].iter().product();
    let d = dims[subsystem];
    let w = embed_local(basis.vectors(), dims, subsystem);
    let mut rotated = w.adjoint() * state.matrix() * &w;
    let n = rotated.nrows();
    for i in 0..n {
        for j in 0..n {
            if (i / stride) % d != (j / stride) % d {
                rotated[(i, j)] = c(0.0, 0.0);
            }
        }
    }
    Ok(DensityMatrix::from_trusted(&w * rotated * w.adjoint(), dims.to_vec()))
}

/// Outcome probabilities and conditional states of a projective measurement on one factor.
pub fn measurement_outcomes(
    state: &DensityMatrix,
    basis: &ProjectiveBasis,
    subsystem: usize,
) -> Result<Vec<MeasurementOutcome>> {
    check_factor(state, basis, subsystem)?;
    let dims = state.dims();
    Ok((0..basis.dim())
        .map(|i| {
            let p = embed_local(&basis.projector(i), dims, subsystem);
            let branch = &p * state.matrix() * &p;
            let probability = branch.trace().re.max(0.0);
            let state = (probability > NULL_OUTCOME)
                .then(|| DensityMatrix::from_trusted(branch.unscale(probability), dims.to_vec()));
            MeasurementOutcome { probability, state }
        })
        .collect())
}

/// State of apparatus ⊗ A ⊗ B after the coupling that realizes a
/// projective measurement on A.
#[derive(Debug, Clone)]
pub struct ApparatusState {
    state: DensityMatrix,
    blocks: Vec<CMatrix>,
    basis: ProjectiveBasis,
}

impl ApparatusState {
    /// Tripartite state with factor order M, A, B.
    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    /// `O_ij = ⟨i^A|ρ^AB|j^A⟩`, row-major over `(i, j)`.
    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize, j: usize) -> &CMatrix {
        &self.blocks[i * self.basis.dim() + j]
    }

    pub fn basis(&self) -> &ProjectiveBasis {
        &self.basis
    }

    /// The apparatus and measured-system marginal `ρ₂^{MA}`.
    pub fn apparatus_marginal(&self) -> DensityMatrix {
        crate::state::partial_trace(&self.state, &[0, 1]).expect("tripartite state")
    }
}

/// Operator blocks `O_ij = ⟨v_i|ρ|v_j⟩_A` of a bipartite state in a basis of A.
pub(crate) fn operator_blocks(state: &DensityMatrix, basis: &ProjectiveBasis) -> Result<Vec<CMatrix>> {
    let (da, db) = state.bipartite_dims()?;
    check_factor(state, basis, 0)?;
    let rho = state.matrix();
    let v = basis.vectors();
    let mut blocks = Vec::with_capacity(da * da);
    for i in 0..da {
        for j in 0..da {
            let mut o = CMatrix::zeros(db, db);
            for a in 0..da {
                for b in 0..da {
                    let w = v[(a, i)].conj() * v[(b, j)];
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    o += rho.view((a * db, b * db), (db, db)) * w;
                }
            }
            blocks.push(o);
        }
    }
    Ok(blocks)
}

/// Builds `ρ₂ = Σ_ij |i^M⟩⟨j^M| ⊗ |i^A⟩⟨j^A| ⊗ O_ij` directly from the blocks,
/// with an apparatus register of dimension `d_A` starting in its first basis vector.
pub fn couple_apparatus(state: &DensityMatrix, basis: &ProjectiveBasis) -> Result<ApparatusState> {
    let (da, db) = state.bipartite_dims()?;
    let blocks = operator_blocks(state, basis)?;
    let v = basis.vectors();
    let n = da * da * db;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..da {
        for j in 0..da {
            let o = &blocks[i * da + j];
            for a in 0..da {
                for b in 0..da {
                    let w = v[(a, i)] * v[(b, j)].conj();
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    let row = (i * da + a) * db;
                    let col = (j * da + b) * db;
                    let mut target = m.view_mut((row, col), (db, db));
                    target += o * w;
                }
            }
        }
    }
    Ok(ApparatusState {
        state: DensityMatrix::from_trusted(m, vec![da, da, db]),
        blocks,
        basis: basis.clone(),
    })
}

/// Embeds A isometrically into a `extended_dim`-dimensional space as the leading block.
pub fn naimark_embed(state: &DensityMatrix, extended_dim: usize) -> Result<DensityMatrix> {
    let (da, db) = state.bipartite_dims()?;
    if extended_dim < da {
        return Err(Error::InvalidDimension(format!(
            "extended dimension {extended_dim} is smaller than d_A = {da}"
        )));
    }
    if extended_dim == da {
        return Ok(state.clone());
    }
    let n = extended_dim * db;
    let mut m = CMatrix::zeros(n, n);
    m.view_mut((0, 0), (da * db, da * db)).copy_from(state.matrix());
    Ok(DensityMatrix::from_trusted(m, vec![extended_dim, db]))
}

fn check_partition(state: &DensityMatrix, partition: &[usize]) -> Result<(usize, usize)> {
    let (da, db) = state.bipartite_dims()?;
    if partition.is_empty() || partition.contains(&0) || partition.iter().product::<usize>() != da {
        return Err(Error::PartitionMismatch { partition: partition.to_vec(), expected: da });
    }
    Ok((da, db))
}

/// `Λ₁(…Λₙ(ρ))` with `Λ_k` the projective measurement in `bases[k]` on part `A_k` of A.
pub fn sequential_measure(
    state: &DensityMatrix,
    partition: &[usize],
    bases: &[ProjectiveBasis],
) -> Result<DensityMatrix> {
    let (da, db) = check_partition(state, partition)?;
    if bases.len() != partition.len() || bases.iter().zip(partition).any(|(b, &d)| b.dim() != d) {
        return Err(Error::PartitionMismatch { partition: partition.to_vec(), expected: da });
    }
    let split_dims: Vec<usize> = partition.iter().copied().chain([db]).collect();
    let mut current = state.with_dims(&split_dims)?;
    for k in (0..partition.len()).rev() {
        current = apply_projective(&current, &bases[k], k)?;
    }
    current.with_dims(&[da, db])
}

/// Same as [`sequential_measure`] with the measurements applied in the given order of parts.
pub fn sequential_measure_ordered(
    state: &DensityMatrix,
    partition: &[usize],
    bases: &[ProjectiveBasis],
    order: &[usize],
) -> Result<DensityMatrix> {
    let (da, db) = check_partition(state, partition)?;
    let split_dims: Vec<usize> = partition.iter().copied().chain([db]).collect();
    let mut current = state.with_dims(&split_dims)?;
    for &k in order {
        let basis = bases.get(k).ok_or(Error::IndexOutOfRange { index: k, len: bases.len() })?;
        current = apply_projective(&current, basis, k)?;
    }
    current.with_dims(&[da, db])
}
