//! Minimization over von Neumann measurement bases.
//!
//! Bases are parameterized by Bloch angles for qubits and by a Hermitian
//! generator (`V = exp(iH)`) otherwise. Local search is a Nelder–Mead
//! simplex, restarted from Haar-random bases; a dense Bloch-angle grid
//! serves as the brute-force reference for qubits.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, unitary_from_generator, unitary_log, CMatrix, C64};
use crate::measurement::ProjectiveBasis;
use crate::random::stream_rng;

fn default_restarts() -> usize {
    20
}
fn default_max_iterations() -> usize {
    2000
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_step() -> f64 {
    0.3
}
fn default_inner_iterations() -> usize {
    500
}

/// Multistart settings. The seed has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Objective spread at which a simplex counts as converged.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Initial simplex edge length in parameter space.
    #[serde(default = "default_step")]
    pub step: f64,
    pub seed: u64,
    /// Iteration cap of the inner fidelity ascent used by the geometric quantity.
    #[serde(default = "default_inner_iterations")]
    pub inner_iterations: usize,
    /// Attach a grid-oracle comparison to qubit results.
    #[serde(default)]
    pub oracle_check: bool,
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        OptimizerConfig {
            restarts: default_restarts(),
            max_iterations: default_max_iterations(),
            tolerance: default_tolerance(),
            step: default_step(),
            seed,
            inner_iterations: default_inner_iterations(),
            oracle_check: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 || self.inner_iterations == 0 {
            return Err(Error::InvalidConfig("restarts and iteration limits must be positive".into()));
        }
        if !(self.tolerance > 0.0 && self.step > 0.0) {
            return Err(Error::InvalidConfig("tolerance and step must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parameterization

/// Parameter layout for a product of bases, one factor per part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisParameterization {
    dims: Vec<usize>,
}

/// Number of reals describing a basis of dimension `d`.
pub fn parameter_count(d: usize) -> usize {
    match d {
        0 | 1 => 0,
        2 => 2,
        _ => d * d,
    }
}

impl BasisParameterization {
    pub fn single(d: usize) -> Self {
        BasisParameterization { dims: vec![d] }
    }

    pub fn product(dims: &[usize]) -> Self {
        BasisParameterization { dims: dims.to_vec() }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn param_count(&self) -> usize {
        self.dims.iter().map(|&d| parameter_count(d)).sum()
    }

    pub fn decode(&self, params: &[f64]) -> Result<Vec<ProjectiveBasis>> {
        if params.len() != self.param_count() {
            return Err(Error::ParameterCountMismatch { expected: self.param_count(), found: params.len() });
        }
        let mut offset = 0;
        self.dims
            .iter()
            .map(|&d| {
                let n = parameter_count(d);
                let b = decode_basis(&params[offset..offset + n], d);
                offset += n;
                b
            })
            .collect()
    }

    pub fn encode(&self, bases: &[ProjectiveBasis]) -> Result<Vec<f64>> {
        if bases.len() != self.dims.len() || bases.iter().zip(&self.dims).any(|(b, &d)| b.dim() != d) {
            return Err(Error::DimensionMismatch("bases do not match the parameterization".into()));
        }
        Ok(bases.iter().flat_map(encode_basis).collect())
    }
}

/// Decodes a basis of dimension `d`.
///
/// Qubits: `(θ, φ)` with first vector `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
/// Otherwise `d²` reals fill a Hermitian `H` (diagonal first, then real and
/// imaginary parts of the upper triangle row by row) and the basis is the
/// columns of `exp(iH)`.
pub fn decode_basis(params: &[f64], d: usize) -> Result<ProjectiveBasis> {
    let expected = parameter_count(d);
    if params.len() != expected || d == 0 {
        return Err(Error::ParameterCountMismatch { expected, found: params.len() });
    }
    Ok(ProjectiveBasis::from_unitary(match d {
        1 => CMatrix::identity(1, 1),
        2 => qubit_unitary(params[0], params[1]),
        _ => unitary_from_generator(&generator(params, d)),
    }))
}

fn qubit_unitary(theta: f64, phi: f64) -> CMatrix {
    let (s, co) = (0.5 * theta).sin_cos();
    let e = C64::from_polar(1.0, phi);
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), -e.conj() * s, e * s, c(co, 0.0)])
}

fn generator(params: &[f64], d: usize) -> CMatrix {
    let mut h = CMatrix::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = c(params[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = c(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Inverse of [`decode_basis`] up to the projector set.
pub fn encode_basis(basis: &ProjectiveBasis) -> Vec<f64> {
    let v = basis.vectors();
    match basis.dim() {
        1 => Vec::new(),
        2 => {
            let (a, b) = (v[(0, 0)], v[(1, 0)]);
            let theta = 2.0 * b.norm().atan2(a.norm());
            let phi = if b.norm() < 1e-15 || a.norm() < 1e-15 { 0.0 } else { b.arg() - a.arg() };
            vec![theta, phi]
        }
        d => match unitary_log(v) {
            Some(h) => {
                let mut p = Vec::with_capacity(d * d);
                p.extend((0..d).map(|i| h[(i, i)].re));
                for i in 0..d {
                    for j in i + 1..d {
                        p.push(h[(i, j)].re);
                        p.push(h[(i, j)].im);
                    }
                }
                p
            }
            None => vec![0.0; d * d],
        },
    }
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal pulled into `Q`.
pub fn haar_random_unitary(d: usize, seed: u64) -> CMatrix {
    let mut rng = stream_rng(seed, "haar-unitary", 0);
    haar_unitary_with(&mut rng, d)
}

pub(crate) fn haar_unitary_with<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

// ---------------------------------------------------------------------------
// Nelder–Mead

/// Outcome of one simplex run.
#[derive(Debug, Clone)]
pub struct SimplexRun {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Settings of a single simplex run.
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub step: f64,
    pub max_iterations: usize,
    /// Spread reported as convergence.
    pub tolerance: f64,
}

/// Derivative-free simplex minimization with adaptive coefficients for
/// higher dimensions. Iterates until the value spread drops to 1% of the
/// tolerance, the simplex collapses, or the iteration cap is hit; a run
/// counts as converged when the final spread is within the tolerance.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: SimplexOptions) -> SimplexRun {
    let n = x0.len();
    if n == 0 {
        let value = f(x0);
        return SimplexRun { x: Vec::new(), value, iterations: 0, evaluations: 1, converged: true };
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = if n <= 2 {
        (1.0, 2.0, 0.5, 0.5)
    } else {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    };
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evaluations)).collect();
    let stop_spread = opts.tolerance * 1e-2;
    let mut iterations = 0;

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let diameter = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= stop_spread || diameter <= 1e-11 || iterations >= opts.max_iterations {
            return SimplexRun {
                x: pts[0].clone(),
                value: vals[0],
                iterations,
                evaluations,
                converged: spread <= opts.tolerance,
            };
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (ci, pi) in centroid.iter_mut().zip(p) {
                *ci += pi / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr, &mut evaluations);
        if fr < vals[0] {
            let xe = along(alpha * gamma);
            let fe = eval(&xe, &mut evaluations);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(alpha * rho);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, p)| b + sigma * (p - b)).collect();
            vals[i] = eval(&shrunk, &mut evaluations);
            pts[i] = shrunk;
        }
    }
}

/// A simplex run followed by polishing restarts from the best point with a
/// smaller simplex, repeated while they still improve.
fn polished_simplex<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: SimplexOptions) -> SimplexRun {
    let mut run = nelder_mead(&mut f, x0, opts);
    let mut step = opts.step;
    for _ in 0..3 {
        if run.iterations >= opts.max_iterations || x0.is_empty() {
            break;
        }
        step *= 0.1;
        let next = nelder_mead(&mut f, &run.x, SimplexOptions { step, ..opts });
        let improved = run.value - next.value;
        run.iterations += next.iterations;
        run.evaluations += next.evaluations;
        if next.value < run.value {
            run.x = next.x;
            run.value = next.value;
            run.converged = next.converged;
        }
        if improved <= opts.tolerance * 1e-2 {
            break;
        }
    }
    run
}

// ---------------------------------------------------------------------------
// Multistart

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartRecord {
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Started from a caller-supplied point rather than a Haar-random basis.
    pub warm_start: bool,
}

/// Best value and bases over all restarts, with per-restart diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub value: f64,
    pub bases: Vec<ProjectiveBasis>,
    pub params: Vec<f64>,
    pub restarts: Vec<RestartRecord>,
    pub converged: bool,
    /// Restarts agreed on the value but not on the basis.
    pub flat_landscape: bool,
    pub evaluations: usize,
}

impl OptimizationResult {
    pub fn basis(&self) -> &ProjectiveBasis {
        &self.bases[0]
    }
}

/// Objective over a tuple of bases (one per part of the parameterization).
pub type BasesObjective<'a> = dyn Fn(&[ProjectiveBasis]) -> f64 + Sync + 'a;

/// Initial parameters of restart `r`: one Haar-random basis per part.
pub fn restart_point(space: &BasisParameterization, seed: u64, r: usize) -> Vec<f64> {
    space
        .dims()
        .iter()
        .enumerate()
        .flat_map(|(j, &d)| {
            let mut rng = stream_rng(seed, "restart", ((r as u64) << 16) | j as u64);
            let u = haar_unitary_with(&mut rng, d);
            encode_basis(&ProjectiveBasis::from_unitary(u))
        })
        .collect()
}

/// Multistart minimization with `config.restarts` Haar-random starts.
pub fn minimize_over_bases(
    objective: &BasesObjective<'_>,
    space: &BasisParameterization,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    minimize_with_starts(objective, space, config, &[])
}

/// Multistart minimization; `warm_starts` are run first, then the Haar-random restarts.
/// Ties keep the earliest restart.
pub fn minimize_with_starts(
    objective: &BasesObjective<'_>,
    space: &BasisParameterization,
    config: &OptimizerConfig,
    warm_starts: &[Vec<f64>],
) -> Result<OptimizationResult> {
    config.validate()?;
    let n = space.param_count();
    if let Some(bad) = warm_starts.iter().find(|w| w.len() != n) {
        return Err(Error::ParameterCountMismatch { expected: n, found: bad.len() });
    }
    let mut starts: Vec<(Vec<f64>, bool)> = warm_starts.iter().map(|w| (w.clone(), true)).collect();
    starts.extend((0..config.restarts).map(|r| (restart_point(space, config.seed, r), false)));

    let opts = SimplexOptions {
        step: config.step,
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
    };
    let eval = |p: &[f64]| -> f64 {
        let bases = space.decode(p).expect("parameter count checked");
        objective(&bases)
    };
    let runs: Vec<(SimplexRun, bool)> = starts
        .par_iter()
        .map(|(x0, warm)| (polished_simplex(eval, x0, opts), *warm))
        .collect();

    let mut best = 0;
    for (i, (run, _)) in runs.iter().enumerate() {
        if run.value < runs[best].0.value {
            best = i;
        }
    }
    let best_run = &runs[best].0;
    let bases = space.decode(&best_run.x)?;

    let flat_landscape = n > 0
        && runs.iter().any(|(run, _)| {
            run.converged
                && run.value - best_run.value <= 10.0 * config.tolerance
                && space
                    .decode(&run.x)
                    .map(|b| b.iter().zip(&bases).any(|(x, y)| x.projector_distance(y) > 1e-3))
                    .unwrap_or(false)
        });

    let result = OptimizationResult {
        value: best_run.value,
        bases,
        params: best_run.x.clone(),
        restarts: runs
            .iter()
            .map(|(r, warm)| RestartRecord {
                value: r.value,
                iterations: r.iterations,
                evaluations: r.evaluations,
                converged: r.converged,
                warm_start: *warm,
            })
            .collect(),
        converged: runs.iter().any(|(r, _)| r.converged),
        flat_landscape,
        evaluations: runs.iter().map(|(r, _)| r.evaluations).sum(),
    };
    if result.converged {
        Ok(result)
    } else {
        Err(Error::OptimizerDidNotConverge(Box::new(result)))
    }
}

/// Single-basis convenience wrapper around [`minimize_over_bases`].
pub fn minimize_single<F>(objective: F, d: usize, config: &OptimizerConfig) -> Result<OptimizationResult>
where
    F: Fn(&ProjectiveBasis) -> f64 + Sync,
{
    let wrapped = |b: &[ProjectiveBasis]| objective(&b[0]);
    minimize_over_bases(&wrapped, &BasisParameterization::single(d), config)
}

// ---------------------------------------------------------------------------
// Grid oracle

/// Points per Bloch angle: θ over `[0, π]`, φ over `[0, 2π]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridResolution {
    pub theta_points: usize,
    pub phi_points: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        GridResolution { theta_points: 181, phi_points: 361 }
    }
}

impl GridResolution {
    /// Halves both spacings; the refined grid contains every point of this one.
    pub fn doubled(self) -> Self {
        GridResolution { theta_points: 2 * self.theta_points - 1, phi_points: 2 * self.phi_points - 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridOracleResult {
    /// Minimum over the grid points alone.
    pub grid_value: f64,
    /// After simplex refinement from the best grid point (never above `grid_value`).
    pub value: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Iteration cap of the simplex refinement after the grid scan.
pub const ORACLE_REFINE_ITERATIONS: usize = 200;

/// Brute-force minimum of a qubit-basis objective over the Bloch-angle grid,
/// refined by a short simplex run from the best grid point.
pub fn grid_oracle_qubit<F>(objective: F, d: usize, resolution: GridResolution) -> Result<GridOracleResult>
where
    F: Fn(&ProjectiveBasis) -> f64,
{
    if d != 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    if resolution.theta_points < 30 || resolution.phi_points < 30 {
        return Err(Error::InvalidConfig("grid oracle needs at least 30 points per angle".into()));
    }
    let dt = PI / (resolution.theta_points - 1) as f64;
    let dp = 2.0 * PI / (resolution.phi_points - 1) as f64;
    let eval = |t: f64, p: f64| objective(&ProjectiveBasis::from_unitary(qubit_unitary(t, p)));

    let (mut best, mut bt, mut bp) = (f64::INFINITY, 0.0, 0.0);
    for i in 0..resolution.theta_points {
        let t = i as f64 * dt;
        // φ is irrelevant at the poles
        let phis = if i == 0 || i + 1 == resolution.theta_points { 1 } else { resolution.phi_points };
        for j in 0..phis {
            let p = j as f64 * dp;
            let v = eval(t, p);
            if v < best {
                best = v;
                bt = t;
                bp = p;
            }
        }
    }
    let run = nelder_mead(
        |x: &[f64]| eval(x[0], x[1]),
        &[bt, bp],
        SimplexOptions { step: dt, max_iterations: ORACLE_REFINE_ITERATIONS, tolerance: 1e-12 },
    );
    let (value, theta, phi) = if run.value < best { (run.value, run.x[0], run.x[1]) } else { (best, bt, bp) };
    Ok(GridOracleResult { grid_value: best, value, theta, phi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_defect};

    #[test]
    fn qubit_decoding_examples() {
        let b = decode_basis(&[0.0, 0.0], 2).unwrap();
        assert!(b.projector_distance(&ProjectiveBasis::computational(2)) < 1e-15);
        let b = decode_basis(&[PI / 2.0, 0.0], 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pm = ProjectiveBasis::new(CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]))
            .unwrap();
        assert!(b.projector_distance(&pm) < 1e-15);
    }

    #[test]
    fn generator_decoding_at_zero_is_computational() {
        let b = decode_basis(&[0.0; 9], 3).unwrap();
        assert!(b.projector_distance(&ProjectiveBasis::computational(3)) < 1e-15);
        assert!(matches!(decode_basis(&[0.0; 4], 3), Err(Error::ParameterCountMismatch { expected: 9, found: 4 })));
    }

    #[test]
    fn encode_decode_recovers_projectors() {
        for d in [2, 3, 4] {
            for seed in 0..5 {
                let b = ProjectiveBasis::new(haar_random_unitary(d, seed)).unwrap();
                let back = decode_basis(&encode_basis(&b), d).unwrap();
                assert!(back.projector_distance(&b) < 1e-9, "d={d} seed={seed}");
            }
        }
    }

    #[test]
    fn haar_unitary_properties() {
        let u1 = haar_random_unitary(1, 3);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-12);
        for d in 2..6 {
            let u = haar_random_unitary(d, 42);
            assert!(unitarity_defect(&u) <= 1e-10);
            assert_eq!(u, haar_random_unitary(d, 42));
        }
        assert!(max_abs_diff(&haar_random_unitary(3, 1), &haar_random_unitary(3, 2)) > 1e-3);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let run = nelder_mead(
            |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + 2.0,
            &[0.0, 0.0],
            SimplexOptions { step: 0.5, max_iterations: 2000, tolerance: 1e-10 },
        );
        assert!(run.converged);
        assert!((run.value - 2.0).abs() < 1e-10);
        assert!((run.x[0] - 1.0).abs() < 1e-4 && (run.x[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn constant_objective() {
        let cfg = OptimizerConfig::with_seed(1);
        let r = minimize_single(|_| 0.75, 3, &cfg).unwrap();
        assert_eq!(r.value, 0.75);
        let g = grid_oracle_qubit(|_| 0.75, 2, GridResolution::default()).unwrap();
        assert_eq!(g.value, 0.75);
    }

    #[test]
    fn grid_oracle_rejects_non_qubits() {
        assert!(matches!(
            grid_oracle_qubit(|_| 0.0, 3, GridResolution::default()),
            Err(Error::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn phase_invariance_of_decoded_projectors() {
        let b = decode_basis(&[0.7, 1.9], 2).unwrap();
        let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::from_polar(1.0, 0.4),
            C64::from_polar(1.0, -2.2),
        ]));
        let shifted = ProjectiveBasis::new(b.vectors() * phases).unwrap();
        for i in 0..2 {
            assert!(max_abs_diff(&b.projector(i), &shifted.projector(i)) < 1e-10);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let target = ProjectiveBasis::new(haar_random_unitary(2, 99)).unwrap();
        let f = |b: &ProjectiveBasis| b.projector_distance(&target);
        let cfg = OptimizerConfig::with_seed(5);
        let a = minimize_single(f, 2, &cfg).unwrap();
        let b = minimize_single(f, 2, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.params, b.params);
        assert!(unitarity_defect(a.basis().vectors()) < 1e-10);
    }

    #[test]
    fn warm_start_is_never_worsened() {
        let target = ProjectiveBasis::new(haar_random_unitary(3, 4)).unwrap();
        let f = |b: &[ProjectiveBasis]| b[0].projector_distance(&target);
        let space = BasisParameterization::single(3);
        let mut cfg = OptimizerConfig::with_seed(1);
        cfg.restarts = 1;
        cfg.max_iterations = 50;
        let warm = encode_basis(&target);
        let r = minimize_with_starts(&f, &space, &cfg, &[warm]).unwrap_or_else(|e| match e {
            Error::OptimizerDidNotConverge(r) => *r,
            other => panic!("{other}"),
        });
        assert!(r.value < 1e-8);
        assert!(r.restarts[0].warm_start);
    }
}
