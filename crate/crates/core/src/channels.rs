//! Quantum operations on B and the monotonicity harnesses.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::correlations::{compute, CorrelationResult, Measure, ObjectiveKernel, Quantity};
use crate::error::{Error, Result};
use crate::linalg::{c, identity, kron, max_abs_diff, CMatrix};
use crate::measurement::{ProjectiveBasis, NULL_OUTCOME};
use crate::optimizer::{grid_oracle_qubit, haar_unitary_with, GridResolution, OptimizerConfig};
use crate::random::stream_rng;
use crate::state::{matrix_to_pairs, pairs_to_matrix, DensityMatrix};

/// Completeness tolerance for `Σ V_i† V_i = 1`.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Allowed increase before a monotonicity comparison counts as a violation.
pub const MONOTONICITY_TOL: f64 = 1e-6;

/// Kraus operators `V_i : H_B → H_B′`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::IncompleteKraus { residual: 1.0 });
        };
        let (d_out, d_in) = first.shape();
        if operators.iter().any(|v| v.shape() != (d_out, d_in)) {
            return Err(Error::DimensionMismatch("Kraus operators have different shapes".into()));
        }
        let residual = completeness_residual(&operators);
        if residual > COMPLETENESS_TOL {
            return Err(Error::IncompleteKraus { residual });
        }
        Ok(KrausChannel { operators })
    }

    pub fn identity(d: usize) -> Self {
        KrausChannel { operators: vec![identity(d)] }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        KrausChannel::new(vec![u])
    }

    /// `ρ ↦ (1−p) ρ + p Tr(ρ) 1/d`; `p = 1` is the completely depolarizing channel.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(format!("depolarizing weight {p} outside [0, 1]")));
        }
        let mut ops = Vec::with_capacity(d * d + 1);
        if p < 1.0 {
            ops.push(identity(d) * c((1.0 - p).sqrt(), 0.0));
        }
        let w = (p / d as f64).sqrt();
        for j in 0..d {
            for k in 0..d {
                let mut v = CMatrix::zeros(d, d);
                v[(j, k)] = c(w, 0.0);
                ops.push(v);
            }
        }
        KrausChannel::new(ops)
    }

    /// Lüders instrument of a projective measurement.
    pub fn projective(basis: &ProjectiveBasis) -> Self {
        KrausChannel { operators: (0..basis.dim()).map(|i| basis.projector(i)).collect() }
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn input_dim(&self) -> usize {
        self.operators[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn kraus_count(&self) -> usize {
        self.operators.len()
    }

    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(&self.operators)
    }
}

fn completeness_residual(ops: &[CMatrix]) -> f64 {
    let d = ops[0].ncols();
    let sum = ops.iter().fold(CMatrix::zeros(d, d), |acc, v| acc + v.adjoint() * v);
    max_abs_diff(&sum, &identity(d))
}

/// One branch of an instrument.
#[derive(Debug, Clone)]
pub struct InstrumentOutcome {
    pub probability: f64,
    /// `None` for null outcomes (`q ≤ 1e-12`).
    pub state: Option<DensityMatrix>,
}

fn lifted(state: &DensityMatrix, channel: &KrausChannel) -> Result<(usize, Vec<CMatrix>)> {
    let (da, db) = state.bipartite_dims()?;
    if channel.input_dim() != db {
        return Err(Error::DimensionMismatch(format!(
            "channel acts on dimension {}, subsystem B has dimension {db}",
            channel.input_dim()
        )));
    }
    let ia = identity(da);
    Ok((da, channel.operators.iter().map(|v| kron(&ia, v)).collect()))
}

/// `Σ_i (1_A ⊗ V_i) ρ (1_A ⊗ V_i)†` on `A ⊗ B′`.
pub fn apply_channel_b(state: &DensityMatrix, channel: &KrausChannel) -> Result<DensityMatrix> {
    let (da, lifted) = lifted(state, channel)?;
    let n = da * channel.output_dim();
    let out = lifted.iter().fold(CMatrix::zeros(n, n), |acc, v| acc + v * state.matrix() * v.adjoint());
    DensityMatrix::new(out, &[da, channel.output_dim()])
}

/// Outcome probabilities `q_i = Tr[V_i ρ V_i†]` and post-states `V_i ρ V_i† / q_i`.
pub fn instrument_on_b(state: &DensityMatrix, channel: &KrausChannel) -> Result<Vec<InstrumentOutcome>> {
    let (da, lifted) = lifted(state, channel)?;
    let dims = [da, channel.output_dim()];
    lifted
        .iter()
        .map(|v| {
            let m = v * state.matrix() * v.adjoint();
            let q = m.trace().re;
            let state = if q > NULL_OUTCOME { Some(DensityMatrix::new(m.unscale(q), &dims)?) } else { None };
            Ok(InstrumentOutcome { probability: q, state })
        })
        .collect()
}

/// Kraus operators from the `d_B`-column isometry of a Haar unitary on `C^k ⊗ C^{d_B}`.
pub fn random_channel(d_b: usize, kraus_count: usize, seed: u64) -> Result<KrausChannel> {
    random_channel_between(d_b, d_b, kraus_count, seed)
}

/// As [`random_channel`] with output dimension `d_out`; needs `k · d_out ≥ d_in`.
pub fn random_channel_between(d_in: usize, d_out: usize, kraus_count: usize, seed: u64) -> Result<KrausChannel> {
    if kraus_count == 0 || d_in == 0 || d_out == 0 || kraus_count * d_out < d_in {
        return Err(Error::InvalidDimension(format!(
            "cannot build {kraus_count} Kraus operators from dimension {d_in} to {d_out}"
        )));
    }
    let n = kraus_count * d_out;
    let mut rng = stream_rng(seed, "channel", ((d_in as u64) << 32) | (d_out as u64) << 16 | kraus_count as u64);
    let u = haar_unitary_with(&mut rng, n);
    let ops = (0..kraus_count).map(|i| u.view((i * d_out, 0), (d_out, d_in)).into_owned()).collect();
    KrausChannel::new(ops)
}

// ---------------------------------------------------------------------------
// Channel files: "d_B d_B' k" then k JSON matrices of [re, im] pairs, one per line.

pub fn parse_channel(text: &str) -> Result<KrausChannel> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty channel file".into()))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad channel header {header:?}"))))
        .collect::<Result<_>>()?;
    let [d_in, d_out, k] = nums[..] else {
        return Err(Error::Parse(format!("channel header needs 3 numbers, got {header:?}")));
    };
    let ops = lines
        .map(|l| {
            let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(l).map_err(|e| Error::Parse(e.to_string()))?;
            let m = pairs_to_matrix(&rows)?;
            if m.shape() != (d_out, d_in) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, header says {d_out}x{d_in}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    if ops.len() != k {
        return Err(Error::Parse(format!("header announces {k} Kraus operators, file has {}", ops.len())));
    }
    KrausChannel::new(ops)
}

pub fn channel_to_string(channel: &KrausChannel) -> String {
    let mut out = format!("{} {} {}\n", channel.input_dim(), channel.output_dim(), channel.kraus_count());
    for v in &channel.operators {
        out.push_str(&serde_json::to_string(&matrix_to_pairs(v)).expect("matrix serializes"));
        out.push('\n');
    }
    out
}

pub fn read_channel(path: impl AsRef<Path>) -> Result<KrausChannel> {
    parse_channel(&std::fs::read_to_string(path)?)
}

pub fn write_channel(path: impl AsRef<Path>, channel: &KrausChannel) -> Result<()> {
    std::fs::write(path, channel_to_string(channel))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Monotonicity

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// A quantity value with the evidence behind it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Evaluation {
    /// `min(heuristic, oracle)`.
    pub value: f64,
    pub heuristic: f64,
    pub oracle: Option<f64>,
    pub restarts: usize,
    pub converged: bool,
}

impl Evaluation {
    pub fn oracle_backed(&self) -> bool {
        self.oracle.is_some()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub quantity: String,
    pub before: Evaluation,
    /// Single post-channel value, or the `q`-weighted outcome average.
    pub after: f64,
    pub after_parts: Vec<(f64, Evaluation)>,
    /// `after − before`; positive means the quantity grew.
    pub margin: f64,
    pub oracle_backed: bool,
    pub verdict: Verdict,
}

fn check_selector(quantity: &Quantity) -> Result<()> {
    match quantity {
        Quantity::Discord
        | Quantity::Deficit
        | Quantity::GeneralizedDeficit { .. }
        | Quantity::GeneralizedDiscord { .. } => Ok(()),
        other => Err(Error::UnsupportedMeasure(format!("{} has no monotonicity harness", other.name()))),
    }
}

/// Heuristic value, re-checked against the grid oracle when `d_A = 2` and
/// the per-basis objective has a closed form.
pub fn evaluate(state: &DensityMatrix, quantity: &Quantity, config: &OptimizerConfig) -> Result<Evaluation> {
    let result: CorrelationResult = compute(state, quantity, config)?;
    let (da, _) = state.bipartite_dims()?;
    let oracle = if da == 2 {
        let kernel = ObjectiveKernel::new(state)?;
        let resolution = GridResolution::default();
        match quantity {
            Quantity::Deficit | Quantity::GeneralizedDeficit { measure: Measure::ClosedForm } => {
                Some(grid_oracle_qubit(|b| kernel.deficit(b), 2, resolution)?.value.max(0.0))
            }
            Quantity::Discord | Quantity::GeneralizedDiscord { measure: Measure::ClosedForm } => {
                Some(grid_oracle_qubit(|b| kernel.discord(b), 2, resolution)?.value.max(0.0))
            }
            _ => None,
        }
    } else {
        None
    };
    Ok(Evaluation {
        value: oracle.map_or(result.value, |o| o.min(result.value)),
        heuristic: result.value,
        oracle,
        restarts: result.optimization.restarts.len(),
        converged: result.optimization.converged,
    })
}

fn verdict(margin: f64, oracle_backed: bool) -> Verdict {
    if margin <= MONOTONICITY_TOL {
        Verdict::Pass
    } else if oracle_backed {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

/// `Q(Λ_B(ρ)) ≤ Q(ρ)`.
pub fn check_monotonicity(
    state: &DensityMatrix,
    channel: &KrausChannel,
    quantity: &Quantity,
    config: &OptimizerConfig,
) -> Result<MonotonicityReport> {
    check_selector(quantity)?;
    let out = apply_channel_b(state, channel)?;
    let before = evaluate(state, quantity, config)?;
    let after = evaluate(&out, quantity, config)?;
    let margin = after.value - before.value;
    let oracle_backed = before.oracle_backed() && after.oracle_backed();
    Ok(MonotonicityReport {
        quantity: quantity.name(),
        after: after.value,
        before,
        after_parts: vec![(1.0, after)],
        margin,
        oracle_backed,
        verdict: verdict(margin, oracle_backed),
    })
}

/// `Σ_i q_i Q(σ_i) ≤ Q(ρ)` over the non-null outcomes of the instrument.
pub fn check_average_monotonicity(
    state: &DensityMatrix,
    channel: &KrausChannel,
    quantity: &Quantity,
    config: &OptimizerConfig,
) -> Result<MonotonicityReport> {
    check_selector(quantity)?;
    let before = evaluate(state, quantity, config)?;
    let mut parts = Vec::new();
    for outcome in instrument_on_b(state, channel)? {
        if let Some(s) = outcome.state {
            parts.push((outcome.probability, evaluate(&s, quantity, config)?));
        }
    }
    let after: f64 = parts.iter().map(|(q, e)| q * e.value).sum();
    let margin = after - before.value;
    let oracle_backed = before.oracle_backed() && parts.iter().all(|(_, e)| e.oracle_backed());
    Ok(MonotonicityReport {
        quantity: quantity.name(),
        before,
        after,
        after_parts: parts,
        margin,
        oracle_backed,
        verdict: verdict(margin, oracle_backed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::couple_apparatus;
    use crate::random::{bell_phi_plus, ginibre_mixed, random_basis, rho_cc};
    use crate::state::partial_trace;
    use crate::entanglement::measurement_entanglement;
    use proptest::prelude::*;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig { restarts: 8, ..OptimizerConfig::with_seed(3) }
    }

    #[test]
    fn identity_channel_is_noop() {
        let s = ginibre_mixed(&[2, 3], 6, 1).unwrap();
        let out = apply_channel_b(&s, &KrausChannel::identity(3)).unwrap();
        assert!(out.max_entry_distance(&s) < 1e-12);
    }

    #[test]
    fn full_depolarization_gives_product() {
        let s = ginibre_mixed(&[2, 3], 6, 2).unwrap();
        let out = apply_channel_b(&s, &KrausChannel::depolarizing(3, 1.0).unwrap()).unwrap();
        let expected = partial_trace(&s, &[0]).unwrap().tensor(&DensityMatrix::maximally_mixed(&[3]).unwrap());
        assert!(out.max_entry_distance(&expected) < 1e-12);
    }

    #[test]
    fn random_channels_are_complete_and_deterministic() {
        for seed in 0..100 {
            let ch = random_channel(2, 1 + (seed as usize % 4), seed).unwrap();
            assert!(ch.completeness_residual() <= 1e-9);
        }
        assert_eq!(random_channel(3, 2, 9).unwrap(), random_channel(3, 2, 9).unwrap());
        let single = random_channel(3, 1, 4).unwrap();
        assert!(crate::linalg::unitarity_defect(&single.operators()[0]) < 1e-12);
        let s = ginibre_mixed(&[2, 2], 4, 5).unwrap();
        let out = apply_channel_b(&s, &random_channel(2, 3, 5).unwrap()).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-10);
        let iso = random_channel_between(2, 3, 1, 1).unwrap();
        assert_eq!(apply_channel_b(&s, &iso).unwrap().dims(), &[2, 3]);
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let v = identity(2) * c(0.5, 0.0);
        assert!(matches!(KrausChannel::new(vec![v]), Err(Error::IncompleteKraus { .. })));
        let s = ginibre_mixed(&[2, 2], 4, 5).unwrap();
        assert!(matches!(apply_channel_b(&s, &KrausChannel::identity(3)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn instrument_examples() {
        let comp = ProjectiveBasis::computational(2);
        let outcomes = instrument_on_b(&rho_cc(), &KrausChannel::projective(&comp)).unwrap();
        assert_eq!(outcomes.len(), 2);
        for (i, o) in outcomes.iter().enumerate() {
            assert!((o.probability - 0.5).abs() < 1e-12);
            let mut p = [0.0; 4];
            p[i * 3] = 1.0;
            let expected = DensityMatrix::diagonal(&p, &[2, 2]).unwrap();
            assert!(o.state.as_ref().unwrap().max_entry_distance(&expected) < 1e-12);
        }
        let u = random_channel(2, 1, 3).unwrap();
        let one = instrument_on_b(&ginibre_mixed(&[2, 2], 4, 1).unwrap(), &u).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].probability - 1.0).abs() < 1e-12);
        let zero = DensityMatrix::diagonal(&[1.0, 0.0, 0.0, 0.0], &[2, 2]).unwrap();
        let null = instrument_on_b(&zero, &KrausChannel::projective(&comp)).unwrap();
        assert!(null[1].state.is_none());
    }

    #[test]
    fn channel_file_round_trip() {
        let ch = random_channel_between(2, 3, 2, 7).unwrap();
        let back = parse_channel(&channel_to_string(&ch)).unwrap();
        assert!(max_abs_diff(&back.operators()[1], &ch.operators()[1]) < 1e-15);
        assert!(matches!(parse_channel("2 2 2\n[[[1,0],[0,0]],[[0,0],[1,0]]]\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn monotonicity_examples() {
        let c = cfg();
        let r = check_monotonicity(&bell_phi_plus(), &KrausChannel::identity(2), &Quantity::Discord, &c).unwrap();
        assert!(r.margin.abs() < 1e-6);
        assert_eq!(r.verdict, Verdict::Pass);
        let dep = KrausChannel::depolarizing(2, 1.0).unwrap();
        let r = check_monotonicity(&bell_phi_plus(), &dep, &Quantity::Discord, &c).unwrap();
        assert!(r.after < 1e-7 && (r.before.value - 1.0).abs() < 1e-6);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.oracle_backed);
        assert!(matches!(
            check_monotonicity(&bell_phi_plus(), &dep, &Quantity::Geometric, &c),
            Err(Error::UnsupportedMeasure(_))
        ));
    }

    #[test]
    fn average_monotonicity_examples() {
        let c = cfg();
        let s = ginibre_mixed(&[2, 2], 4, 6).unwrap();
        let u = random_channel(2, 1, 6).unwrap();
        let r = check_average_monotonicity(&s, &u, &Quantity::Deficit, &c).unwrap();
        assert!(r.margin.abs() < 1e-6);
        let inst = random_channel(2, 2, 8).unwrap();
        let r = check_average_monotonicity(&rho_cc(), &inst, &Quantity::Discord, &c).unwrap();
        assert!(r.before.value < 1e-6 && r.after < 1e-6);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict(0.0, false), Verdict::Pass);
        assert_eq!(verdict(1e-3, true), Verdict::Fail);
        assert_eq!(verdict(1e-3, false), Verdict::Inconclusive);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn channel_is_instrument_average(seed in 0u64..10_000, k in 1usize..4) {
            let s = ginibre_mixed(&[2, 2], 4, seed).unwrap();
            let ch = random_channel(2, k, seed ^ 0x55).unwrap();
            let whole = apply_channel_b(&s, &ch).unwrap();
            let avg = instrument_on_b(&s, &ch)
                .unwrap()
                .into_iter()
                .filter_map(|o| o.state.map(|st| st.matrix() * c(o.probability, 0.0)))
                .fold(CMatrix::zeros(4, 4), |a, m| a + m);
            prop_assert!(max_abs_diff(&avg, whole.matrix()) < 1e-10);
        }

        #[test]
        fn channels_on_b_keep_marginal_a(seed in 0u64..10_000, k in 1usize..4) {
            let s = ginibre_mixed(&[2, 3], 6, seed).unwrap();
            let ch = random_channel_between(3, 2, k + 1, seed).unwrap();
            let out = apply_channel_b(&s, &ch).unwrap();
            let a0 = partial_trace(&s, &[0]).unwrap();
            let a1 = partial_trace(&out, &[0]).unwrap();
            prop_assert!(a0.max_entry_distance(&a1) < 1e-10);
        }

        /// Instruments on B cannot raise the outcome-averaged entanglement of
        /// the apparatus state for a fixed measurement basis.
        #[test]
        fn apparatus_entanglement_is_locc_monotone(seed in 0u64..10_000) {
            let s = ginibre_mixed(&[2, 2], 4, seed).unwrap();
            let b = random_basis(2, seed + 1);
            let before = measurement_entanglement(&s, &b).unwrap().value;
            let inst = random_channel(2, 2, seed + 2).unwrap();
            let mut after = 0.0;
            for o in instrument_on_b(&s, &inst).unwrap() {
                if let Some(st) = o.state {
                    let app = couple_apparatus(&st, &b).unwrap();
                    after += o.probability * crate::entanglement::relative_entropy_upper(&app).unwrap();
                }
            }
            prop_assert!(after <= before + 1e-9);
        }
    }
}
