//! Verification suites over seeded random ensembles.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{check_average_monotonicity, check_monotonicity, random_channel, Verdict, MONOTONICITY_TOL};
use crate::correlations::{
    discord_objective, discord_rewriting_check, generalized_deficit, information_deficit, multipartite_deficit,
    multipartite_discord, povm_discord, quantum_discord, Measure, Quantity,
};
use crate::entanglement::{geometric_cq_distance, measurement_entanglement, partial_entanglement};
use crate::error::{Error, Result};
use crate::optimizer::OptimizerConfig;
use crate::random::{derive_seed, ginibre_mixed, random_basis};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Thm1,
    Thm2,
    Rewriting,
    MonotonicityEq4,
    MonotonicityEq6,
    Multipartite,
    Povm,
    Geometric,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Thm1,
        Suite::Thm2,
        Suite::Rewriting,
        Suite::MonotonicityEq4,
        Suite::MonotonicityEq6,
        Suite::Multipartite,
        Suite::Povm,
        Suite::Geometric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Thm1 => "thm1",
            Suite::Thm2 => "thm2",
            Suite::Rewriting => "rewriting",
            Suite::MonotonicityEq4 => "monotonicity-eq4",
            Suite::MonotonicityEq6 => "monotonicity-eq6",
            Suite::Multipartite => "multipartite",
            Suite::Povm => "povm",
            Suite::Geometric => "geometric",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::Thm1 => 1e-8,
            Suite::Thm2 | Suite::Rewriting => 1e-9,
            Suite::MonotonicityEq4 | Suite::MonotonicityEq6 | Suite::Multipartite | Suite::Povm => MONOTONICITY_TOL,
            Suite::Geometric => 1e-4,
        }
    }

    /// What the per-case residual measures.
    pub fn provenance(self) -> &'static str {
        match self {
            Suite::Thm1 => "max pairwise gap between coherent-information lower bound, relative-entropy upper bound and S(Lambda(rho)) - S(rho), random basis",
            Suite::Thm2 => "|discord objective - partial entanglement| for a random basis",
            Suite::Rewriting => "|sum_i p_i S(rho_i) - [S(Lambda(rho_AB)) - S(Lambda_A(rho_A))]| for a random basis",
            Suite::MonotonicityEq4 => "Q(Lambda_B(rho)) - Q(rho) for a random channel on B; values min(multistart, grid oracle) at d_A = 2",
            Suite::MonotonicityEq6 => "sum_i q_i Q(sigma_i) - Q(rho) for a random 2-outcome instrument on B; values min(multistart, grid oracle) at d_A = 2",
            Suite::Multipartite => "max(0, deficit - multipartite deficit, discord - multipartite discord), both multistart upper bounds",
            Suite::Povm => "max(0, POVM discord - projective discord)",
            Suite::Geometric => "|apparatus geometric deficit - direct fidelity distance to CQ states|",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub cases: usize,
    pub dims: (usize, usize),
    pub seed: u64,
    pub config: OptimizerConfig,
    /// Monotonicity suites check both deficit and discord unless set.
    pub quantity: Option<Quantity>,
    pub partition: Option<Vec<usize>>,
    /// Extended dimension for the POVM suite; `d_A²` when unset.
    pub povm_dim: Option<usize>,
    pub tolerance: Option<f64>,
}

impl SuiteOptions {
    pub fn new(cases: usize, dims: (usize, usize), seed: u64) -> Self {
        SuiteOptions {
            cases,
            dims,
            seed,
            config: OptimizerConfig::with_seed(seed),
            quantity: None,
            partition: None,
            povm_dim: None,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseRecord {
    pub index: usize,
    pub seed: u64,
    pub values: BTreeMap<String, f64>,
    pub residual: f64,
    pub verdict: Verdict,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub cases: usize,
    pub tolerance: f64,
    pub max_residual: f64,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub provenance: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub records: Vec<CaseRecord>,
    pub summary: SuiteSummary,
}

fn worst(a: Verdict, b: Verdict) -> Verdict {
    match (a, b) {
        (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
        (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
        _ => Verdict::Pass,
    }
}

struct CaseOutcome {
    values: BTreeMap<String, f64>,
    residual: f64,
    verdict: Verdict,
}

impl CaseOutcome {
    fn identity(values: BTreeMap<String, f64>, residual: f64, tol: f64) -> Self {
        let verdict = if residual <= tol { Verdict::Pass } else { Verdict::Fail };
        CaseOutcome { values, residual, verdict }
    }
}

fn values<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Runs every case of a suite, in parallel, with records in case order.
pub fn run_suite(suite: Suite, options: &SuiteOptions) -> Result<SuiteReport> {
    options.config.validate()?;
    let (da, db) = options.dims;
    if da < 2 || db < 1 {
        return Err(Error::InvalidDimension(format!("suite dimensions {da}x{db}")));
    }
    let tol = options.tolerance.unwrap_or_else(|| suite.default_tolerance());
    let partition = match (&options.partition, suite) {
        (Some(p), _) => p.clone(),
        (None, Suite::Multipartite) if da % 2 == 0 && da > 2 => vec![2, da / 2],
        (None, Suite::Multipartite) => {
            return Err(Error::InvalidConfig(format!("no default partition for d_A = {da}")));
        }
        (None, _) => vec![da],
    };
    if partition.iter().product::<usize>() != da {
        return Err(Error::PartitionMismatch { partition, expected: da });
    }
    let quantities = match &options.quantity {
        Some(q) => vec![q.clone()],
        None => vec![Quantity::Deficit, Quantity::Discord],
    };

    let records: Vec<CaseRecord> = (0..options.cases)
        .into_par_iter()
        .map(|index| {
            let seed = derive_seed(options.seed, suite.name(), index as u64);
            let config = OptimizerConfig { seed, ..options.config.clone() };
            let outcome = run_case(suite, options, &partition, &quantities, tol, seed, &config);
            match outcome {
                Ok(o) => CaseRecord { index, seed, values: o.values, residual: o.residual, verdict: o.verdict, note: None },
                Err(e) => CaseRecord {
                    index,
                    seed,
                    values: BTreeMap::new(),
                    residual: f64::NAN,
                    verdict: match e {
                        Error::OptimizerDidNotConverge(_) => Verdict::Inconclusive,
                        _ => Verdict::Fail,
                    },
                    note: Some(e.to_string()),
                },
            }
        })
        .collect();

    let count = |v: Verdict| records.iter().filter(|r| r.verdict == v).count();
    let summary = SuiteSummary {
        suite,
        cases: records.len(),
        tolerance: tol,
        max_residual: records.iter().map(|r| r.residual).filter(|r| r.is_finite()).fold(0.0, f64::max),
        pass: count(Verdict::Pass),
        fail: count(Verdict::Fail),
        inconclusive: count(Verdict::Inconclusive),
        provenance: suite.provenance().to_string(),
    };
    Ok(SuiteReport { records, summary })
}

fn case_state(dims: (usize, usize), seed: u64, full_rank: bool) -> Result<DensityMatrix> {
    let dim = dims.0 * dims.1;
    let rank = if full_rank { dim } else { 1 + (derive_seed(seed, "rank", 0) % dim as u64) as usize };
    ginibre_mixed(&[dims.0, dims.1], rank, derive_seed(seed, "state", 0))
}

fn run_case(
    suite: Suite,
    options: &SuiteOptions,
    partition: &[usize],
    quantities: &[Quantity],
    tol: f64,
    seed: u64,
    config: &OptimizerConfig,
) -> Result<CaseOutcome> {
    let (da, db) = options.dims;
    let basis = || random_basis(da, derive_seed(seed, "basis", 0));
    match suite {
        Suite::Thm1 => {
            let state = case_state(options.dims, seed, false)?;
            let cert = measurement_entanglement(&state, &basis())?;
            let residual = (cert.upper - cert.lower)
                .abs()
                .max((cert.upper - cert.value).abs())
                .max((cert.lower - cert.value).abs());
            let v = values([("lower", cert.lower), ("upper", cert.upper), ("closed_form", cert.value)]);
            Ok(CaseOutcome::identity(v, residual, tol))
        }
        Suite::Thm2 => {
            let state = case_state(options.dims, seed, false)?;
            let b = basis();
            let d = discord_objective(&state, &b)?;
            let p = partial_entanglement(&state, &b)?;
            Ok(CaseOutcome::identity(values([("discord_objective", d), ("partial_entanglement", p)]), (d - p).abs(), tol))
        }
        Suite::Rewriting => {
            let state = case_state(options.dims, seed, false)?;
            let r = discord_rewriting_check(&state, &basis())?;
            Ok(CaseOutcome::identity(values([("residual", r)]), r, tol))
        }
        Suite::MonotonicityEq4 | Suite::MonotonicityEq6 => {
            let state = case_state(options.dims, seed, true)?;
            let average = suite == Suite::MonotonicityEq6;
            let kraus = if average { 2 } else { 1 + (derive_seed(seed, "kraus", 0) % 4) as usize };
            let channel = random_channel(db, kraus, derive_seed(seed, "channel", 0))?;
            let mut out = CaseOutcome { values: BTreeMap::new(), residual: f64::NEG_INFINITY, verdict: Verdict::Pass };
            for q in quantities {
                let report = if average {
                    check_average_monotonicity(&state, &channel, q, config)?
                } else {
                    check_monotonicity(&state, &channel, q, config)?
                };
                let name = q.name();
                out.values.insert(format!("{name}.before"), report.before.value);
                out.values.insert(format!("{name}.after"), report.after);
                out.values.insert(format!("{name}.margin"), report.margin);
                out.values.insert(format!("{name}.oracle_backed"), f64::from(u8::from(report.oracle_backed)));
                out.residual = out.residual.max(report.margin);
                out.verdict = worst(out.verdict, report.verdict);
            }
            out.values.insert("kraus_operators".into(), kraus as f64);
            Ok(out)
        }
        Suite::Multipartite => {
            let state = case_state(options.dims, seed, true)?;
            let deficit = information_deficit(&state, config)?.value;
            let discord = quantum_discord(&state, config)?.value;
            let m_deficit = multipartite_deficit(&state, partition, config)?.value;
            let m_discord = multipartite_discord(&state, partition, config)?.value;
            let residual = (deficit - m_deficit).max(discord - m_discord).max(0.0);
            // both sides are heuristic upper bounds, so a violation cannot be certified
            let verdict = if residual <= tol { Verdict::Pass } else { Verdict::Inconclusive };
            let v = values([
                ("deficit", deficit),
                ("discord", discord),
                ("multipartite_deficit", m_deficit),
                ("multipartite_discord", m_discord),
            ]);
            Ok(CaseOutcome { values: v, residual, verdict })
        }
        Suite::Povm => {
            let state = case_state(options.dims, seed, true)?;
            let extended = options.povm_dim.unwrap_or(da * da);
            let projective = quantum_discord(&state, config)?.value;
            let povm = povm_discord(&state, extended, config)?.value;
            let v = values([("discord", projective), ("povm_discord", povm), ("extended_dim", extended as f64)]);
            Ok(CaseOutcome::identity(v, (povm - projective).max(0.0), tol))
        }
        Suite::Geometric => {
            let state = case_state(options.dims, seed, true)?;
            let direct = geometric_cq_distance(&state, config)?.value;
            let apparatus = generalized_deficit(&state, Measure::Geometric, config)?.value;
            let v = values([("direct", direct), ("apparatus", apparatus)]);
            Ok(CaseOutcome::identity(v, (direct - apparatus).abs(), tol))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("thm3".parse::<Suite>(), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn identity_suites_pass() {
        for suite in [Suite::Thm1, Suite::Thm2, Suite::Rewriting] {
            let r = run_suite(suite, &SuiteOptions::new(40, (2, 3), 7)).unwrap();
            assert_eq!(r.summary.fail, 0, "{suite}");
            assert_eq!(r.records.len(), 40);
            assert!(r.records.iter().enumerate().all(|(i, rec)| rec.index == i));
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let opts = SuiteOptions { config: OptimizerConfig { restarts: 4, ..OptimizerConfig::with_seed(1) }, ..SuiteOptions::new(4, (2, 2), 1) };
        let a = serde_json::to_string(&run_suite(Suite::MonotonicityEq6, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite(Suite::MonotonicityEq6, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multipartite_needs_a_partition() {
        assert!(matches!(
            run_suite(Suite::Multipartite, &SuiteOptions::new(1, (3, 2), 1)),
            Err(Error::InvalidConfig(_))
        ));
        let opts = SuiteOptions { partition: Some(vec![3]), ..SuiteOptions::new(1, (4, 2), 1) };
        assert!(matches!(run_suite(Suite::Multipartite, &opts), Err(Error::PartitionMismatch { .. })));
    }

    #[test]
    fn worst_verdict() {
        assert_eq!(worst(Verdict::Pass, Verdict::Inconclusive), Verdict::Inconclusive);
        assert_eq!(worst(Verdict::Fail, Verdict::Inconclusive), Verdict::Fail);
        assert_eq!(worst(Verdict::Pass, Verdict::Pass), Verdict::Pass);
    }
}
