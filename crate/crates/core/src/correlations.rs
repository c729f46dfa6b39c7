//! Quantum discord, one-way information deficit and their generalized,
//! POVM and multipartite variants, all as minimizations over von Neumann
//! measurements on A.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entanglement::{
    apparatus_geometric, apparatus_local_geometric, apparatus_local_upper, geometric_cq_distance,
    relative_entropy_upper,
};
use crate::error::{Error, Result};
use crate::linalg::{entropy_of_spectrum, hermitian_eigenvalues, max_abs, CMatrix};
use crate::measurement::{
    apply_projective, couple_apparatus, measurement_outcomes, naimark_embed, operator_blocks, sequential_measure,
    ProjectiveBasis, NULL_OUTCOME,
};
use crate::optimizer::{
    encode_basis, grid_oracle_qubit, minimize_over_bases, minimize_single, minimize_with_starts,
    BasisParameterization, GridResolution, OptimizationResult, OptimizerConfig,
};
use crate::state::{partial_trace, von_neumann_entropy, DensityMatrix};

/// Entanglement measure plugged into the apparatus construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Distillable entanglement, equal here to the relative entropy of entanglement.
    ClosedForm,
    /// `1 − max F` over the separable states aligned with the apparatus record.
    Geometric,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::ClosedForm => "closed-form",
            Measure::Geometric => "geometric",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" | "distillable" | "relative-entropy" => Ok(Measure::ClosedForm),
            "geometric" => Ok(Measure::Geometric),
            other => Err(Error::UnsupportedMeasure(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Quantity {
    Discord,
    Deficit,
    GeneralizedDeficit { measure: Measure },
    GeneralizedDiscord { measure: Measure },
    PovmDiscord { extended_dim: usize },
    MultipartiteDeficit { partition: Vec<usize> },
    MultipartiteDiscord { partition: Vec<usize> },
    Geometric,
}

impl Quantity {
    pub fn name(&self) -> String {
        match self {
            Quantity::Discord => "discord".into(),
            Quantity::Deficit => "deficit".into(),
            Quantity::GeneralizedDeficit { measure } => format!("generalized-deficit:{measure}"),
            Quantity::GeneralizedDiscord { measure } => format!("generalized-discord:{measure}"),
            Quantity::PovmDiscord { .. } => "povm-discord".into(),
            Quantity::MultipartiteDeficit { .. } => "multipartite-deficit".into(),
            Quantity::MultipartiteDiscord { .. } => "multipartite-discord".into(),
            Quantity::Geometric => "geometric".into(),
        }
    }

    /// Which formula produced a value of this quantity.
    pub fn provenance(&self) -> &'static str {
        match self {
            Quantity::Discord => "min_b S(rho_A) - S(rho) + sum_i p_i S(rho_i)",
            Quantity::Deficit => "min_b S(Lambda_b(rho)) - S(rho)",
            Quantity::GeneralizedDeficit { measure: Measure::ClosedForm } => {
                "min_b S(rho_2 || sigma_M), sigma_M = apparatus-dephased coupled state"
            }
            Quantity::GeneralizedDeficit { measure: Measure::Geometric } => {
                "min_b 1 - max F(rho_2, sigma) over record-aligned separable sigma"
            }
            Quantity::GeneralizedDiscord { measure: Measure::ClosedForm } => {
                "min_b E_R^{M|AB}(rho_2) - E_R^{M|A}(rho_2^{MA})"
            }
            Quantity::GeneralizedDiscord { measure: Measure::Geometric } => {
                "min_b E_G^{M|AB}(rho_2) - E_G^{M|A}(rho_2^{MA})"
            }
            Quantity::PovmDiscord { .. } => {
                "S(rho_A) - S(rho) + min over extended bases of sum_i p_i S(rho_i^B)"
            }
            Quantity::MultipartiteDeficit { .. } => "min over product bases of S(Lambda(rho)) - S(rho)",
            Quantity::MultipartiteDiscord { .. } => {
                "min over product bases of S(Lambda(rho)) - S(Lambda(rho_A)) - S(rho) + S(rho_A)"
            }
            Quantity::Geometric => "min over CQ sigma of 1 - F(rho, sigma), fidelity recomputed at the optimum",
        }
    }
}

// ---------------------------------------------------------------------------
// Per-basis objectives

/// `S(ρ^A) − S(ρ^AB) + Σ_i p_i S(ρ_i)` for one basis, with `ρ_i` the joint
/// post-measurement states. Null outcomes contribute nothing.
pub fn discord_objective(state: &DensityMatrix, basis: &ProjectiveBasis) -> Result<f64> {
    let rho_a = partial_trace(state, &[0])?;
    Ok(von_neumann_entropy(&rho_a) - von_neumann_entropy(state) + conditional_entropy_sum(state, basis)?)
}

/// `Σ_i p_i S(ρ_i)` over non-null outcomes.
pub fn conditional_entropy_sum(state: &DensityMatrix, basis: &ProjectiveBasis) -> Result<f64> {
    Ok(measurement_outcomes(state, basis, 0)?
        .iter()
        .filter_map(|o| o.state.as_ref().map(|s| o.probability * von_neumann_entropy(s)))
        .sum())
}

/// `S(Λ(ρ^AB)) − S(ρ^AB)` for one basis.
pub fn deficit_objective(state: &DensityMatrix, basis: &ProjectiveBasis) -> Result<f64> {
    Ok(von_neumann_entropy(&apply_projective(state, basis, 0)?) - von_neumann_entropy(state))
}

/// `|Σ_i p_i S(ρ_i) − [S(Λ(ρ^AB)) − S(Λ_A(ρ^A))]|`, which vanishes identically.
pub fn discord_rewriting_check(state: &DensityMatrix, basis: &ProjectiveBasis) -> Result<f64> {
    let lhs = conditional_entropy_sum(state, basis)?;
    let rho_a = partial_trace(state, &[0])?;
    let rhs = von_neumann_entropy(&apply_projective(state, basis, 0)?)
        - von_neumann_entropy(&apply_projective(&rho_a, basis, 0)?);
    Ok((lhs - rhs).abs())
}

/// `S(Λ(ρ)) − S(ρ)` for a product basis applied through sequential measurements.
pub fn multipartite_deficit_objective(
    state: &DensityMatrix,
    partition: &[usize],
    bases: &[ProjectiveBasis],
) -> Result<f64> {
    Ok(von_neumann_entropy(&sequential_measure(state, partition, bases)?) - von_neumann_entropy(state))
}

/// `S(Λ(ρ)) − S(Λ(ρ^A)) − S(ρ) + S(ρ^A)` for a product basis.
pub fn multipartite_discord_objective(
    state: &DensityMatrix,
    partition: &[usize],
    bases: &[ProjectiveBasis],
) -> Result<f64> {
    let rho_a = partial_trace(state, &[0])?;
    let da = rho_a.dim();
    let rho_a = rho_a.with_dims(&[da, 1])?;
    let joint = multipartite_deficit_objective(state, partition, bases)?;
    let local = multipartite_deficit_objective(&rho_a, partition, bases)?;
    Ok(joint - local)
}

/// Precomputed blocks `⟨a|ρ|b⟩` of a bipartite state for fast per-basis
/// evaluation inside the optimizers.
///
/// For a basis `{v_i}` the dephased state is `⊕_i C_i` with
/// `C_i = Σ_ab v̄_i[a] v_i[b] ⟨a|ρ|b⟩`, so every objective reduces to the
/// spectra of `d_B × d_B` blocks.
#[derive(Debug, Clone)]
pub struct ObjectiveKernel {
    da: usize,
    db: usize,
    blocks: Vec<CMatrix>,
    entropy_ab: f64,
    entropy_a: f64,
}

impl ObjectiveKernel {
    pub fn new(state: &DensityMatrix) -> Result<Self> {
        let (da, db) = state.bipartite_dims()?;
        let blocks = operator_blocks(state, &ProjectiveBasis::computational(da))?;
        Ok(ObjectiveKernel {
            da,
            db,
            blocks,
            entropy_ab: von_neumann_entropy(state),
            entropy_a: von_neumann_entropy(&partial_trace(state, &[0])?),
        })
    }

    pub fn dim_a(&self) -> usize {
        self.da
    }

    /// `(p_i, S_raw(C_i))` with `S_raw` the entropy function of the unnormalized block.
    fn branches(&self, basis: &ProjectiveBasis) -> impl Iterator<Item = (f64, f64)> + '_ {
        let v = basis.vectors().clone();
        (0..self.da).map(move |i| {
            let mut block = CMatrix::zeros(self.db, self.db);
            for a in 0..self.da {
                let va = v[(a, i)].conj();
                if va.norm_sqr() == 0.0 {
                    continue;
                }
                for b in 0..self.da {
                    let w = va * v[(b, i)];
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    block.zip_apply(&self.blocks[a * self.da + b], |x, o| *x += o * w);
                }
            }
            let p = block.trace().re;
            (p, entropy_of_spectrum(hermitian_eigenvalues(&block)))
        })
    }

    /// `S(Λ(ρ))`.
    pub fn dephased_entropy(&self, basis: &ProjectiveBasis) -> f64 {
        self.branches(basis).map(|(_, s)| s).sum()
    }

    /// `Σ_i p_i S(ρ_i^B)`.
    pub fn conditional_entropy(&self, basis: &ProjectiveBasis) -> f64 {
        self.branches(basis)
            .filter(|&(p, _)| p > NULL_OUTCOME)
            .map(|(p, s)| s + p * p.log2())
            .sum()
    }

    pub fn deficit(&self, basis: &ProjectiveBasis) -> f64 {
        self.dephased_entropy(basis) - self.entropy_ab
    }

    pub fn discord(&self, basis: &ProjectiveBasis) -> f64 {
        self.entropy_a - self.entropy_ab + self.conditional_entropy(basis)
    }

    pub fn entropy_ab(&self) -> f64 {
        self.entropy_ab
    }

    pub fn entropy_a(&self) -> f64 {
        self.entropy_a
    }
}

// ---------------------------------------------------------------------------
// Minimized quantities

/// Grid-oracle cross-check attached to qubit results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleComparison {
    pub oracle_value: f64,
    /// `value − oracle_value`; positive means the multistart missed the grid minimum.
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationResult {
    /// Bits; an upper bound on the true minimum.
    pub value: f64,
    /// Argmin basis, one per part for multipartite quantities.
    pub bases: Vec<ProjectiveBasis>,
    pub quantity: Quantity,
    pub optimization: OptimizationResult,
    pub oracle: Option<OracleComparison>,
}

impl CorrelationResult {
    pub fn basis(&self) -> &ProjectiveBasis {
        &self.bases[0]
    }

    fn from_optimization(quantity: Quantity, optimization: OptimizationResult) -> Self {
        CorrelationResult {
            value: optimization.value.max(0.0),
            bases: optimization.bases.clone(),
            quantity,
            optimization,
            oracle: None,
        }
    }
}

fn attach_oracle<F: Fn(&ProjectiveBasis) -> f64>(
    mut result: CorrelationResult,
    da: usize,
    config: &OptimizerConfig,
    objective: F,
) -> Result<CorrelationResult> {
    if config.oracle_check && da == 2 {
        let oracle = grid_oracle_qubit(objective, 2, GridResolution::default())?;
        result.oracle = Some(OracleComparison { oracle_value: oracle.value, gap: result.value - oracle.value });
    }
    Ok(result)
}

/// Minimal discord over projective measurements on A.
pub fn quantum_discord(state: &DensityMatrix, config: &OptimizerConfig) -> Result<CorrelationResult> {
    let kernel = ObjectiveKernel::new(state)?;
    let opt = minimize_single(|b| kernel.discord(b), kernel.da, config)?;
    attach_oracle(CorrelationResult::from_optimization(Quantity::Discord, opt), kernel.da, config, |b| {
        kernel.discord(b)
    })
}

/// One-way information deficit: minimal entropy increase of a projective measurement on A.
pub fn information_deficit(state: &DensityMatrix, config: &OptimizerConfig) -> Result<CorrelationResult> {
    let kernel = ObjectiveKernel::new(state)?;
    let opt = minimize_single(|b| kernel.deficit(b), kernel.da, config)?;
    attach_oracle(CorrelationResult::from_optimization(Quantity::Deficit, opt), kernel.da, config, |b| {
        kernel.deficit(b)
    })
}

/// Per-basis entanglement of the coupled state across M | AB.
pub fn apparatus_entanglement(
    state: &DensityMatrix,
    basis: &ProjectiveBasis,
    measure: Measure,
    inner_iterations: usize,
) -> Result<f64> {
    let app = couple_apparatus(state, basis)?;
    match measure {
        Measure::ClosedForm => relative_entropy_upper(&app),
        Measure::Geometric => Ok(apparatus_geometric(&app, inner_iterations)),
    }
}

/// Per-basis partial entanglement `E^{M|AB} − E^{M|A}` of the coupled state.
pub fn apparatus_partial_entanglement(
    state: &DensityMatrix,
    basis: &ProjectiveBasis,
    measure: Measure,
    inner_iterations: usize,
) -> Result<f64> {
    let app = couple_apparatus(state, basis)?;
    match measure {
        Measure::ClosedForm => Ok(relative_entropy_upper(&app)? - apparatus_local_upper(&app)?),
        Measure::Geometric => {
            Ok(apparatus_geometric(&app, inner_iterations) - apparatus_local_geometric(&app, inner_iterations))
        }
    }
}

/// `min_b E^{M|AB}(ρ₂(b))` for the selected measure.
pub fn generalized_deficit(
    state: &DensityMatrix,
    measure: Measure,
    config: &OptimizerConfig,
) -> Result<CorrelationResult> {
    let (da, _) = state.bipartite_dims()?;
    let iters = config.inner_iterations;
    let objective =
        |b: &ProjectiveBasis| apparatus_entanglement(state, b, measure, iters).unwrap_or(f64::INFINITY);
    let opt = minimize_single(objective, da, config)?;
    Ok(CorrelationResult::from_optimization(Quantity::GeneralizedDeficit { measure }, opt))
}

/// `min_b P_E(ρ₂(b))` for the selected measure.
pub fn generalized_discord(
    state: &DensityMatrix,
    measure: Measure,
    config: &OptimizerConfig,
) -> Result<CorrelationResult> {
    let (da, _) = state.bipartite_dims()?;
    let iters = config.inner_iterations;
    let objective = |b: &ProjectiveBasis| {
        apparatus_partial_entanglement(state, b, measure, iters).unwrap_or(f64::INFINITY)
    };
    let opt = minimize_single(objective, da, config)?;
    Ok(CorrelationResult::from_optimization(Quantity::GeneralizedDiscord { measure }, opt))
}

/// Discord with POVMs on A, realized as projective measurements on A
/// embedded into `extended_dim` dimensions. The marginal entropies come from
/// the original state; only the conditional term is minimized, and the
/// projective argmin is always among the starting points.
pub fn povm_discord(state: &DensityMatrix, extended_dim: usize, config: &OptimizerConfig) -> Result<CorrelationResult> {
    let (da, _) = state.bipartite_dims()?;
    if extended_dim < da {
        return Err(Error::InvalidDimension(format!(
            "extended dimension {extended_dim} is smaller than d_A = {da}"
        )));
    }
    let projective = quantum_discord(state, config)?;
    let quantity = Quantity::PovmDiscord { extended_dim };
    if extended_dim == da {
        return Ok(CorrelationResult { quantity, ..projective });
    }
    let original = ObjectiveKernel::new(state)?;
    let offset = original.entropy_a - original.entropy_ab;
    let embedded = ObjectiveKernel::new(&naimark_embed(state, extended_dim)?)?;
    let warm = encode_basis(&projective.basis().embedded(extended_dim)?);
    let objective = |b: &[ProjectiveBasis]| offset + embedded.conditional_entropy(&b[0]);
    let opt = minimize_with_starts(&objective, &BasisParameterization::single(extended_dim), config, &[warm])?;
    Ok(CorrelationResult::from_optimization(quantity, opt))
}

fn check_partition(state: &DensityMatrix, partition: &[usize]) -> Result<()> {
    let (da, _) = state.bipartite_dims()?;
    if partition.is_empty() || partition.contains(&0) || partition.iter().product::<usize>() != da {
        return Err(Error::PartitionMismatch { partition: partition.to_vec(), expected: da });
    }
    Ok(())
}

/// `Δ_n`: minimal entropy increase over product bases of `A = A₁ ⊗ … ⊗ Aₙ`,
/// optimized jointly over all parts.
pub fn multipartite_deficit(
    state: &DensityMatrix,
    partition: &[usize],
    config: &OptimizerConfig,
) -> Result<CorrelationResult> {
    check_partition(state, partition)?;
    let kernel = ObjectiveKernel::new(state)?;
    let objective = |b: &[ProjectiveBasis]| kernel.deficit(&ProjectiveBasis::product(b));
    let opt = minimize_over_bases(&objective, &BasisParameterization::product(partition), config)?;
    Ok(CorrelationResult::from_optimization(Quantity::MultipartiteDeficit { partition: partition.to_vec() }, opt))
}

/// `δ_n` over product bases of A.
pub fn multipartite_discord(
    state: &DensityMatrix,
    partition: &[usize],
    config: &OptimizerConfig,
) -> Result<CorrelationResult> {
    check_partition(state, partition)?;
    let kernel = ObjectiveKernel::new(state)?;
    let objective = |b: &[ProjectiveBasis]| kernel.discord(&ProjectiveBasis::product(b));
    let opt = minimize_over_bases(&objective, &BasisParameterization::product(partition), config)?;
    Ok(CorrelationResult::from_optimization(Quantity::MultipartiteDiscord { partition: partition.to_vec() }, opt))
}

/// Fidelity distance to the CQ set, wrapped as a correlation result.
pub fn geometric_quantity(state: &DensityMatrix, config: &OptimizerConfig) -> Result<CorrelationResult> {
    let g = geometric_cq_distance(state, config)?;
    Ok(CorrelationResult {
        value: g.value,
        bases: vec![g.basis],
        quantity: Quantity::Geometric,
        optimization: g.optimization,
        oracle: None,
    })
}

/// Dispatches on the quantity.
pub fn compute(state: &DensityMatrix, quantity: &Quantity, config: &OptimizerConfig) -> Result<CorrelationResult> {
    match quantity {
        Quantity::Discord => quantum_discord(state, config),
        Quantity::Deficit => information_deficit(state, config),
        Quantity::GeneralizedDeficit { measure } => generalized_deficit(state, *measure, config),
        Quantity::GeneralizedDiscord { measure } => generalized_discord(state, *measure, config),
        Quantity::PovmDiscord { extended_dim } => povm_discord(state, *extended_dim, config),
        Quantity::MultipartiteDeficit { partition } => multipartite_deficit(state, partition, config),
        Quantity::MultipartiteDiscord { partition } => multipartite_discord(state, partition, config),
        Quantity::Geometric => geometric_quantity(state, config),
    }
}

// ---------------------------------------------------------------------------
// Zero-discord test

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqTolerance {
    /// Off-diagonal block norm allowed in the eigenbasis of `ρ^A`.
    pub structural: f64,
    /// Deficit below which a degenerate-marginal state counts as CQ.
    pub optimization: f64,
}

impl Default for CqTolerance {
    fn default() -> Self {
        CqTolerance { structural: 1e-7, optimization: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CqMethod {
    Structural,
    Optimization,
}

#[derive(Debug, Clone)]
pub struct CqTest {
    pub is_cq: bool,
    /// Witnessing basis of A when the state is CQ.
    pub basis: Option<ProjectiveBasis>,
    pub method: CqMethod,
    /// Off-diagonal block norm or minimal deficit, depending on the method.
    pub residual: f64,
}

/// Eigenvalue gap of `ρ^A` above which its eigenbasis is considered unique.
pub const SPECTRAL_GAP: f64 = 1e-7;

/// Decides whether `ρ = Σ p_i |i⟩⟨i| ⊗ ρ_i` for some orthonormal basis of A.
///
/// With a nondegenerate `ρ^A` the only candidate basis is its eigenbasis
/// and the test is structural. Otherwise the deficit is minimized.
pub fn is_classical_quantum(state: &DensityMatrix, tol: CqTolerance) -> CqTest {
    let Ok(rho_a) = partial_trace(state, &[0]) else {
        return CqTest { is_cq: false, basis: None, method: CqMethod::Structural, residual: f64::INFINITY };
    };
    let spectrum = rho_a.spectrum();
    let nondegenerate = spectrum.eigenvalues.windows(2).all(|w| w[0] - w[1] > SPECTRAL_GAP);
    if nondegenerate {
        let basis = ProjectiveBasis::from_unitary(spectrum.eigenvectors);
        let blocks = operator_blocks(state, &basis).expect("bipartite state");
        let da = basis.dim();
        let residual = (0..da)
            .flat_map(|i| (0..da).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| max_abs(&blocks[i * da + j]))
            .fold(0.0, f64::max);
        let is_cq = residual <= tol.structural;
        return CqTest { is_cq, basis: is_cq.then_some(basis), method: CqMethod::Structural, residual };
    }
    match information_deficit(state, &OptimizerConfig::with_seed(0)) {
        Ok(r) => {
            let is_cq = r.value < tol.optimization;
            CqTest {
                is_cq,
                basis: is_cq.then(|| r.basis().clone()),
                method: CqMethod::Optimization,
                residual: r.value,
            }
        }
        Err(_) => CqTest { is_cq: false, basis: None, method: CqMethod::Optimization, residual: f64::INFINITY },
    }
}
