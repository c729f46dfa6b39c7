//! Small dense complex linear algebra helpers shared by the state and
//! measurement code. Matrix functions are only ever taken of Hermitian
//! inputs, through their spectral decomposition.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Eigenvalues below this are treated as exact zeros inside entropies and logarithms.
pub const LOG_CUTOFF: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Kronecker product with the left factor as the slow index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending
/// and eigenvectors permuted to match.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, descending. Sizes one and two use the
/// closed form; the hot loops of the optimizers live mostly there.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let [l0, l1] = eigenvalues_2x2(m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
            vec![l0, l1]
        }
        _ => {
            let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        }
    }
}

#[inline]
pub(crate) fn eigenvalues_2x2(a: f64, d: f64, b: C64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    [mean + r, mean - r]
}

/// `-λ log₂ λ` summed over the values, with values below [`LOG_CUTOFF`] dropped.
/// Works for unnormalized spectra too.
pub fn entropy_of_spectrum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values
        .into_iter()
        .filter(|&l| l > LOG_CUTOFF)
        .map(|l| -l * l.log2())
        .sum()
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function<F: Fn(f64) -> f64>(m: &CMatrix, f: F) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &l) in values.iter().enumerate() {
        let fl = f(l);
        for i in 0..n {
            scaled[(i, j)] *= fl;
        }
    }
    &scaled * vectors.adjoint()
}

/// Square root of a positive semidefinite Hermitian matrix; negative noise is clamped.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |l| l.max(0.0).sqrt())
}

/// Relative spectral floor below which eigenvalues of a PSD matrix are treated as zero.
pub const PSD_FLOOR: f64 = 1e-14;

/// `L` with `L L† = m` for a PSD matrix, keeping only eigenvalues above
/// `PSD_FLOOR` times the largest one; `L` has one column per kept eigenvalue.
pub fn psd_factor(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let floor = values.first().copied().unwrap_or(0.0).max(0.0) * PSD_FLOOR;
    let kept: Vec<usize> = (0..values.len()).filter(|&j| values[j] > floor && values[j] > 0.0).collect();
    let mut l = CMatrix::zeros(m.nrows(), kept.len());
    for (col, &j) in kept.iter().enumerate() {
        l.set_column(col, &(vectors.column(j) * c(values[j].sqrt(), 0.0)));
    }
    l
}

/// Nuclear norm `‖M‖₁` and polar factor `W = M (M†M)^{+1/2}` (a partial
/// isometry with `Re Tr(W† M) = ‖M‖₁`), from the spectrum of the smaller Gram
/// matrix. Singular values below `√PSD_FLOOR` times the largest are dropped.
///
/// Deliberately avoids the complex SVD, whose singular values were observed to
/// be wrong on well-conditioned 6×6 inputs.
pub fn polar_decomposition(m: &CMatrix) -> (f64, CMatrix) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (0.0, m.clone());
    }
    let wide = rows <= cols;
    let gram = if wide { m * m.adjoint() } else { m.adjoint() * m };
    let (values, vectors) = hermitian_eigen(&gram);
    let floor = values[0].max(0.0) * PSD_FLOOR;
    let mut norm = 0.0;
    let mut scaled = vectors.clone();
    for (j, &l) in values.iter().enumerate() {
        let w = if l > floor && l > 0.0 {
            norm += l.sqrt();
            1.0 / l.sqrt()
        } else {
            0.0
        };
        scaled.column_mut(j).scale_mut(w);
    }
    let inv_root = scaled * vectors.adjoint();
    let polar = if wide { inv_root * m } else { m * inv_root };
    (norm, polar)
}

/// Sum of singular values.
pub fn nuclear_norm(m: &CMatrix) -> f64 {
    polar_decomposition(m).0
}

/// `max |(V†V)_{ij} - δ_{ij}|`
pub fn unitarity_defect(v: &CMatrix) -> f64 {
    let gram = v.adjoint() * v;
    max_abs_diff(&gram, &identity(v.ncols()))
}

/// Embeds a local operator acting on factor `k` of a tensor product with
/// the given dimensions: `1 ⊗ … ⊗ op ⊗ … ⊗ 1`.
pub fn embed_local(op: &CMatrix, dims: &[usize], k: usize) -> CMatrix {
    let left: usize = dims[..k].iter().product();
    let right: usize = dims[k + 1..].iter().product();
    kron(&kron(&identity(left), op), &identity(right))
}

/// Exponential `exp(iH)` of a Hermitian generator.
pub fn unitary_from_generator(h: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &l) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, l);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    &scaled * vectors.adjoint()
}

/// Hermitian `H` with `exp(iH) = U` and spectrum in `(-π, π]`.
///
/// A unitary is diagonalized through the Hermitian combination
/// `cos·Re(U) + sin·Im(U)` for a generic mixing angle; the angle is varied
/// until the reconstruction matches, which fails only on exact
/// eigenvalue coincidences of the mixture.
pub fn unitary_log(u: &CMatrix) -> Option<CMatrix> {
    let n = u.nrows();
    let re = (u + u.adjoint()) * c(0.5, 0.0);
    let im = (u - u.adjoint()) * c(0.0, -0.5);
    for mix in [0.613_f64, 1.377, 2.251, 0.291, 2.903] {
        let k = &re * c(mix.cos(), 0.0) + &im * c(mix.sin(), 0.0);
        let (_, vectors) = hermitian_eigen(&k);
        let mut h = CMatrix::zeros(n, n);
        for j in 0..n {
            let v = vectors.column(j);
            let lambda = (v.adjoint() * u * v)[(0, 0)];
            let angle = lambda.arg();
            h += (v * v.adjoint()) * c(angle, 0.0);
        }
        let h = hermitian_part(&h);
        if max_abs_diff(&unitary_from_generator(&h), u) < 1e-9 {
            return Some(h);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form_matches_general_solver() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, -0.2), c(0.1, 0.2), c(0.3, 0.0)]);
        let fast = hermitian_eigenvalues(&m);
        let (slow, _) = hermitian_eigen(&m);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn eigen_reconstructs() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0), c(0.5, 0.5), c(0.0, -1.0),
                c(0.5, -0.5), c(1.0, 0.0), c(0.2, 0.0),
                c(0.0, 1.0), c(0.2, 0.0), c(-1.0, 0.0),
            ],
        );
        let (values, vectors) = hermitian_eigen(&m);
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
        let back = hermitian_function(&m, |l| l);
        assert!(max_abs_diff(&back, &m) < 1e-12);
        assert!(unitarity_defect(&vectors) < 1e-12);
    }

    #[test]
    fn log_inverts_exp() {
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.3, 0.0), c(0.2, 0.4), c(-0.1, 0.0),
                c(0.2, -0.4), c(-1.1, 0.0), c(0.5, 0.3),
                c(-0.1, 0.0), c(0.5, -0.3), c(0.9, 0.0),
            ],
        );
        let u = unitary_from_generator(&h);
        assert!(unitarity_defect(&u) < 1e-12);
        let back = unitary_log(&u).unwrap();
        assert!(max_abs_diff(&unitary_from_generator(&back), &u) < 1e-10);
    }

    #[test]
    fn entropy_ignores_tiny_values() {
        assert_eq!(entropy_of_spectrum([1.0, 1e-14]), 0.0);
        assert!((entropy_of_spectrum([0.5, 0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polar_factor_attains_nuclear_norm() {
        for seed in 0..200u64 {
            let (r, k) = [(6, 6), (2, 6), (6, 3), (1, 4)][seed as usize % 4];
            let m = CMatrix::from_fn(r, k, |i, j| {
                let x = (seed as f64 + 1.0) * (i as f64 * 1.7 + j as f64 * 0.31 + 0.2);
                c(x.sin(), (1.3 * x).cos())
            });
            let (norm, w) = polar_decomposition(&m);
            let wm = w.adjoint() * &m;
            assert!((wm.trace().re - norm).abs() < 1e-10);
            assert!(max_abs_diff(&wm, &wm.adjoint()) < 1e-10);
            assert!(*hermitian_eigenvalues(&wm).last().unwrap() > -1e-10);
            assert!(norm <= m.norm() * (r.min(k) as f64).sqrt() + 1e-12);
        }
    }
}
