//! Entanglement between the measurement apparatus and the measured system.
//!
//! For states produced by the apparatus coupling, distillable entanglement
//! is pinned from both sides: the coherent information `S(ρ₂^{AB}) − S(ρ₂)`
//! from below and the relative entropy to the apparatus-dephased state from
//! above. Both equal `S(Λ(ρ)) − S(ρ)`, so the three are computed separately
//! and reported together.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{c, polar_decomposition, psd_factor, psd_sqrt, CMatrix};
use crate::measurement::{apply_projective, couple_apparatus, operator_blocks, ApparatusState, ProjectiveBasis};
use crate::optimizer::{minimize_single, OptimizationResult, OptimizerConfig};
use crate::state::{fidelity, partial_trace, relative_entropy, von_neumann_entropy, DensityMatrix};

/// Lower bound, upper bound and closed form of the entanglement created by
/// one measurement, all in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementCertificate {
    pub lower: f64,
    pub upper: f64,
    pub value: f64,
    pub gap: f64,
}

/// Hashing bound `S(Tr_M ρ₂) − S(ρ₂)`, clamped at zero.
pub fn coherent_info_lower(apparatus: &ApparatusState) -> f64 {
    let system = partial_trace(apparatus.state(), &[1, 2]).expect("tripartite state");
    (von_neumann_entropy(&system) - von_neumann_entropy(apparatus.state())).max(0.0)
}

/// `σ = Σ_i Π_i^M ρ₂ Π_i^M`, separable across M | AB.
pub fn dephased_separable_sigma(apparatus: &ApparatusState) -> DensityMatrix {
    let dm = apparatus.state().dims()[0];
    apply_projective(apparatus.state(), &ProjectiveBasis::computational(dm), 0).expect("apparatus factor")
}

/// `S(ρ₂ ‖ σ)` against [`dephased_separable_sigma`].
pub fn relative_entropy_upper(apparatus: &ApparatusState) -> Result<f64> {
    relative_entropy(apparatus.state(), &dephased_separable_sigma(apparatus))
}

/// Entanglement created across M | AB by measuring A in `basis`.
pub fn measurement_entanglement(state: &DensityMatrix, basis: &ProjectiveBasis) -> Result<EntanglementCertificate> {
    let apparatus = couple_apparatus(state, basis)?;
    let lower = coherent_info_lower(&apparatus);
    let upper = relative_entropy_upper(&apparatus)?;
    let value = von_neumann_entropy(&apply_projective(state, basis, 0)?) - von_neumann_entropy(state);
    Ok(EntanglementCertificate { lower, upper, value, gap: upper - lower })
}

/// `P = E^{M|AB} − E^{M|A}`: the measurement entanglement minus the part
/// that survives when B is discarded, `[S(Λ(ρ)) − S(ρ)] − [S(Λ_A(ρ^A)) − S(ρ^A)]`.
pub fn partial_entanglement(state: &DensityMatrix, basis: &ProjectiveBasis) -> Result<f64> {
    let joint = von_neumann_entropy(&apply_projective(state, basis, 0)?) - von_neumann_entropy(state);
    let rho_a = partial_trace(state, &[0])?;
    let local = von_neumann_entropy(&apply_projective(&rho_a, basis, 0)?) - von_neumann_entropy(&rho_a);
    Ok(joint - local)
}

/// Relative entropy of the apparatus marginal `ρ₂^{MA}` to its M-dephased
/// version, i.e. the M | A entanglement of the coupled state.
pub fn apparatus_local_upper(apparatus: &ApparatusState) -> Result<f64> {
    let ma = apparatus.apparatus_marginal();
    let dm = ma.dims()[0];
    let sigma = apply_projective(&ma, &ProjectiveBasis::computational(dm), 0)?;
    relative_entropy(&ma, &sigma)
}

// ---------------------------------------------------------------------------
// Fidelity with classical-quantum states

/// Best fidelity found between a state and the block-diagonal family, with
/// the blocks `R_i` such that `σ = ⊕ R_i R_i†`.
#[derive(Debug, Clone)]
pub struct BlockFidelity {
    pub fidelity: f64,
    pub factors: Vec<CMatrix>,
    pub iterations: usize,
}

/// Maximizes `F(ρ̃, ⊕_i σ_i)` over block-diagonal unit-trace `σ`, where
/// `ρ̃` is given in coordinates adapted to the blocks (`blocks` blocks of
/// size `block`).
///
/// With `σ = R R†` and `R` block diagonal, `√F = ‖√ρ̃ R‖₁`; each step replaces
/// `R` by the block-diagonal part of `ρ̃ R (R†ρ̃R)^{-1/2}`, renormalized,
/// which never decreases the fidelity. The start is the block-diagonal part
/// of `ρ̃` itself.
pub fn max_block_fidelity(rho: &CMatrix, blocks: usize, block: usize, max_iterations: usize) -> BlockFidelity {
    let k = blocks * block;
    debug_assert_eq!(rho.nrows(), k);
    let l = psd_factor(rho);
    let mut factors: Vec<CMatrix> =
        (0..blocks).map(|i| psd_sqrt(&rho.view((i * block, i * block), (block, block)).into_owned())).collect();
    normalize_factors(&mut factors);

    let assemble = |factors: &[CMatrix]| {
        let mut r = CMatrix::zeros(k, k);
        for (i, f) in factors.iter().enumerate() {
            r.view_mut((i * block, i * block), (block, block)).copy_from(f);
        }
        r
    };

    let mut best = BlockFidelity { fidelity: 0.0, factors: factors.clone(), iterations: 0 };
    let mut prev = -1.0;
    for it in 0..=max_iterations {
        // √F = ‖L†R‖₁ and ρR(R†ρR)^{-1/2} = L · polar(L†R)
        let (root_fid, polar) = polar_decomposition(&(l.adjoint() * assemble(&factors)));
        let fid = root_fid * root_fid;
        if fid > best.fidelity {
            best = BlockFidelity { fidelity: fid.min(1.0), factors: factors.clone(), iterations: it };
        }
        if root_fid - prev <= 1e-15 || it == max_iterations {
            break;
        }
        prev = root_fid;

        let t = &l * polar;
        factors = (0..blocks).map(|i| t.view((i * block, i * block), (block, block)).into_owned()).collect();
        normalize_factors(&mut factors);
    }
    best
}

fn normalize_factors(factors: &mut [CMatrix]) {
    let norm: f64 = factors.iter().map(|f| f.norm_squared()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for f in factors.iter_mut() {
            f.unscale_mut(norm);
        }
    }
}

/// `ρ` rewritten in the basis of A: the `(i, j)` block is `O_ij`.
fn rotated_blocks(state: &DensityMatrix, basis: &ProjectiveBasis) -> Result<CMatrix> {
    let (da, db) = state.bipartite_dims()?;
    let blocks = operator_blocks(state, basis)?;
    let mut m = CMatrix::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..da {
            m.view_mut((i * db, j * db), (db, db)).copy_from(&blocks[i * da + j]);
        }
    }
    Ok(m)
}

/// `max F(ρ, σ)` over CQ states `σ = Σ p_i |i⟩⟨i| ⊗ ρ_i` in a fixed basis of A.
pub fn cq_fidelity_for_basis(state: &DensityMatrix, basis: &ProjectiveBasis, max_iterations: usize) -> Result<BlockFidelity> {
    let (da, db) = state.bipartite_dims()?;
    Ok(max_block_fidelity(&rotated_blocks(state, basis)?, da, db, max_iterations))
}

/// Geometric entanglement of the coupled state across M | AB, over the
/// separable states `Σ_i p_i |i^M⟩⟨i^M| ⊗ |i^A⟩⟨i^A| ⊗ ρ_i^B` aligned with
/// the apparatus record: `1 − max F(ρ₂, σ)`.
pub fn apparatus_geometric(apparatus: &ApparatusState, max_iterations: usize) -> f64 {
    let rho2 = apparatus.state();
    let (dm, db) = (rho2.dims()[0], rho2.dims()[2]);
    1.0 - max_block_fidelity(&record_compression(rho2.matrix(), apparatus.basis(), dm, db), dm, db, max_iterations)
        .fidelity
}

/// Same on the M | A marginal (B discarded).
pub fn apparatus_local_geometric(apparatus: &ApparatusState, max_iterations: usize) -> f64 {
    let ma = apparatus.apparatus_marginal();
    let dm = ma.dims()[0];
    1.0 - max_block_fidelity(&record_compression(ma.matrix(), apparatus.basis(), dm, 1), dm, 1, max_iterations)
        .fidelity
}

/// Compresses a state on M ⊗ A ⊗ B onto the span of `|i^M⟩ ⊗ |v_i⟩ ⊗ H_B`;
/// fidelity with states supported there only sees this compression.
fn record_compression(rho: &CMatrix, basis: &ProjectiveBasis, dm: usize, db: usize) -> CMatrix {
    let v = basis.vectors();
    let da = v.nrows();
    let n = dm * da * db;
    let k = dm * db;
    // isometry columns: (i, β) ↦ |i⟩ ⊗ v_i ⊗ |β⟩
    let mut w = CMatrix::zeros(n, k);
    for i in 0..dm {
        for a in 0..da {
            for beta in 0..db {
                w[((i * da + a) * db + beta, i * db + beta)] = v[(a, i)];
            }
        }
    }
    w.adjoint() * rho * w
}

/// Result of the fidelity-based distance to the classical-quantum set.
#[derive(Debug, Clone)]
pub struct GeometricResult {
    /// `1 − F(ρ, σ)` for the returned `σ`: an upper bound on the minimum.
    pub value: f64,
    pub sigma: DensityMatrix,
    pub basis: ProjectiveBasis,
    pub optimization: OptimizationResult,
}

/// `min 1 − F(ρ, σ)` over CQ states `σ`, nested: the basis of A by multistart
/// simplex, the probabilities and conditional states by fidelity ascent.
pub fn geometric_cq_distance(state: &DensityMatrix, config: &OptimizerConfig) -> Result<GeometricResult> {
    let (da, db) = state.bipartite_dims()?;
    let iters = config.inner_iterations;
    let objective = |b: &ProjectiveBasis| {
        cq_fidelity_for_basis(state, b, iters).map(|f| 1.0 - f.fidelity).unwrap_or(f64::INFINITY)
    };
    let optimization = minimize_single(objective, da, config)?;
    let basis = optimization.basis().clone();
    let best = cq_fidelity_for_basis(state, &basis, iters)?;
    let mut sigma = CMatrix::zeros(da * db, da * db);
    for (i, f) in best.factors.iter().enumerate() {
        sigma += crate::linalg::kron(&basis.projector(i), &(f * f.adjoint()));
    }
    let tr = sigma.trace().re;
    let sigma = DensityMatrix::new(sigma * c(1.0 / tr, 0.0), &[da, db])?;
    let value = (1.0 - fidelity(state, &sigma)?).clamp(0.0, 1.0);
    Ok(GeometricResult { value, sigma, basis, optimization })
}
