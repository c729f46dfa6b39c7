//! Seeded state generators and the fixed example states.
//!
//! Every generator call draws from its own ChaCha8 stream keyed by the seed
//! and a call label, so ensembles do not depend on evaluation order.
//! Gaussian variates use the ziggurat sampler of `rand_distr::StandardNormal`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::measurement::ProjectiveBasis;
use crate::optimizer::haar_unitary_with;
use crate::state::{tensor, DensityMatrix};

fn label_hash(label: &str) -> u64 {
    // FNV-1a
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Independent pseudo-random stream for `(seed, label, index)`.
pub fn stream_rng(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label_hash(label) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng
}

/// Seed for the `index`-th member of an ensemble.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    stream_rng(seed, label, index).random()
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// `G G† / Tr(G G†)` with `G` a `∏dims × rank` complex Gaussian matrix.
pub fn ginibre_mixed(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    let dim: usize = dims.iter().product();
    if rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let mut rng = stream_rng(seed, "ginibre", rank as u64);
    let g = gaussian_matrix(&mut rng, dim, rank);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr), dims)
}

/// Haar-random pure state.
pub fn haar_pure(dims: &[usize], seed: u64) -> Result<DensityMatrix> {
    ginibre_mixed(dims, 1, seed)
}

pub fn random_basis(d: usize, seed: u64) -> ProjectiveBasis {
    let mut rng = stream_rng(seed, "basis", d as u64);
    ProjectiveBasis::new(haar_unitary_with(&mut rng, d)).expect("Haar unitary is orthonormal")
}

/// `Σ_i p_i |i⟩⟨i| ⊗ ρ_i` for an orthonormal basis `{|i⟩}` of A.
pub fn cq_state(
    probabilities: &[f64],
    basis: &ProjectiveBasis,
    conditionals: &[DensityMatrix],
) -> Result<DensityMatrix> {
    if probabilities.len() > basis.dim() || probabilities.len() != conditionals.len() || probabilities.is_empty() {
        return Err(Error::InvalidProbabilities(format!(
            "{} probabilities, {} conditional states, basis dimension {}",
            probabilities.len(),
            conditionals.len(),
            basis.dim()
        )));
    }
    if probabilities.iter().any(|&p| !(p >= 0.0)) || (probabilities.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("{probabilities:?} must be nonnegative and sum to 1")));
    }
    let dims_b = conditionals[0].dims().to_vec();
    if conditionals.iter().any(|s| s.dims() != dims_b.as_slice()) {
        return Err(Error::DimensionMismatch("conditional states have different dimensions".into()));
    }
    let db: usize = dims_b.iter().product();
    let da = basis.dim();
    let mut m = CMatrix::zeros(da * db, da * db);
    for (i, (&p, cond)) in probabilities.iter().zip(conditionals).enumerate() {
        m += crate::linalg::kron(&basis.projector(i), cond.matrix()) * c(p, 0.0);
    }
    DensityMatrix::new(m, &[da, db])
}

/// Random CQ state: Haar basis on A, Dirichlet-like weights, full-rank Ginibre conditionals.
pub fn random_cq(da: usize, db: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = stream_rng(seed, "cq-weights", 0);
    let raw: Vec<f64> = (0..da).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let basis = random_basis(da, derive_seed(seed, "cq-basis", 0));
    let conds = (0..da)
        .map(|i| ginibre_mixed(&[db], db, derive_seed(seed, "cq-conditional", i as u64)))
        .collect::<Result<Vec<_>>>()?;
    cq_state(&p, &basis, &conds)
}

/// `p |Ψ⁻⟩⟨Ψ⁻| + (1−p) 1/4` with `|Ψ⁻⟩ = (|01⟩ − |10⟩)/√2`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("Werner weight {p} outside [0, 1]")));
    }
    let singlet = DensityMatrix::from_pure(&[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)], &[2, 2])?;
    let white = DensityMatrix::maximally_mixed(&[2, 2])?;
    singlet.mix(&white, p)
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_phi_plus() -> DensityMatrix {
    DensityMatrix::from_pure(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], &[2, 2])
        .expect("fixture is valid")
}

/// `½|00⟩⟨00| + ½|11⟩⟨11|`.
pub fn rho_cc() -> DensityMatrix {
    DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5], &[2, 2]).expect("fixture is valid")
}

/// Product of two random full-rank states.
pub fn random_product(da: usize, db: usize, seed: u64) -> Result<DensityMatrix> {
    let a = ginibre_mixed(&[da], da, derive_seed(seed, "product-a", 0))?;
    let b = ginibre_mixed(&[db], db, derive_seed(seed, "product-b", 0))?;
    Ok(tensor(&a, &b))
}
