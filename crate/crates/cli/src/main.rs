use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use discord_core::correlations::{compute, is_classical_quantum, CqTolerance, Measure};
use discord_core::random::{derive_seed, ginibre_mixed, haar_pure, random_cq, werner};
use discord_core::state::{read_state, write_state};
use discord_core::verify::run_suite;
use discord_core::{DensityMatrix, OptimizerConfig, Quantity, Suite, SuiteOptions, Verdict};
use serde_json::json;
use thiserror::Error;

mod config;
mod report;

use config::RunConfig;
use report::{fixed, Format, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Unsupported(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

impl From<discord_core::Error> for CliError {
    fn from(e: discord_core::Error) -> Self {
        use discord_core::Error as E;
        match e {
            E::UnsupportedMeasure(_) | E::UnknownSuite(_) => CliError::Unsupported(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

const NOT_CONVERGED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "qdiscord", version, about = "Discord, information deficit and measurement-created entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize a correlation quantity on one state file.
    Compute(ComputeArgs),
    /// Run a verification suite on a seeded random ensemble.
    Verify(VerifyArgs),
    /// Write seeded random state files and a manifest.
    Random(RandomArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run-configuration file; flags take precedence over its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "QC_SEED")]
    seed: Option<u64>,
    /// Multistart restarts (default 20).
    #[arg(long)]
    restarts: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<(RunConfig, u64), CliError> {
        let mut file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if self.restarts.is_some() {
            file.restarts = self.restarts;
        }
        let seed = self.seed.or(file.seed).unwrap_or(0);
        Ok((file, seed))
    }
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    state: PathBuf,
    /// discord, deficit, generalized-deficit[:measure], generalized-discord[:measure],
    /// povm-discord, multipartite-deficit, multipartite-discord or geometric.
    #[arg(long)]
    quantity: String,
    /// Regroup the state's factors, e.g. 4x2.
    #[arg(long)]
    dims: Option<String>,
    /// Factor dimensions of A for multipartite quantities, e.g. 2,2.
    #[arg(long)]
    partition: Option<String>,
    /// closed-form or geometric, for the generalized quantities.
    #[arg(long)]
    measure: Option<String>,
    /// Extended dimension for povm-discord; sweeps d_A..d_A² when absent.
    #[arg(long)]
    povm_dim: Option<usize>,
    /// Optimizer convergence tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Attach the grid-oracle gap to qubit results.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "records")]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// thm1, thm2, rewriting, monotonicity-eq4, monotonicity-eq6, multipartite, povm or geometric.
    suite: String,
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long, default_value = "2x2")]
    dims: String,
    /// Restrict monotonicity suites to one quantity.
    #[arg(long)]
    quantity: Option<String>,
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    partition: Option<String>,
    #[arg(long)]
    povm_dim: Option<usize>,
    /// Residual or margin tolerance; suite default when absent.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "records")]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Ginibre,
    Pure,
    Cq,
    Werner,
}

#[derive(Debug, Args)]
struct RandomArgs {
    #[command(flatten)]
    common: Common,
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long, default_value = "2x2")]
    dims: String,
    /// Ginibre rank; full rank when absent.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Werner weight step; the sweep covers 0..=1.
    #[arg(long, default_value_t = 0.1)]
    p_step: f64,
    /// Output directory for the state files and manifest.jsonl.
    #[arg(long)]
    out: PathBuf,
}

fn parse_dims(text: &str) -> Result<Vec<usize>, CliError> {
    let dims: Vec<usize> = text
        .split('x')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("bad dimensions '{text}', expected e.g. 2x3")))?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(CliError::Input(format!("bad dimensions '{text}'")));
    }
    Ok(dims)
}

fn parse_pair(text: &str) -> Result<(usize, usize), CliError> {
    match parse_dims(text)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(CliError::Input(format!("expected two dimensions, got '{text}'"))),
    }
}

fn parse_partition(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().ok().filter(|&d| d > 0))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| CliError::Input(format!("bad partition '{text}', expected e.g. 2,2")))
}

fn parse_measure(inline: Option<&str>, flag: Option<&str>) -> Result<Measure, CliError> {
    let inline = inline.map(str::parse::<Measure>).transpose()?;
    let flag = flag.map(str::parse::<Measure>).transpose()?;
    match (inline, flag) {
        (Some(a), Some(b)) if a != b => {
            Err(CliError::Input(format!("quantity names measure {a} but --measure is {b}")))
        }
        (a, b) => Ok(a.or(b).unwrap_or(Measure::ClosedForm)),
    }
}

/// Quantities to evaluate; the POVM discord without an explicit dimension
/// expands to a sweep.
fn parse_quantity(
    name: &str,
    measure: Option<&str>,
    povm_dim: Option<usize>,
    partition: Option<Vec<usize>>,
    da: usize,
) -> Result<Vec<Quantity>, CliError> {
    let (base, inline) = match name.split_once(':') {
        Some((b, m)) => (b, Some(m)),
        None => (name, None),
    };
    let generalized = matches!(base, "generalized-deficit" | "generalized-discord");
    if inline.is_some() && !generalized {
        return Err(CliError::Unsupported(format!("unsupported quantity: {name}")));
    }
    let need_partition = || partition.clone().ok_or_else(|| CliError::Input(format!("{base} needs --partition")));
    Ok(match base {
        "discord" => vec![Quantity::Discord],
        "deficit" => vec![Quantity::Deficit],
        "geometric" => vec![Quantity::Geometric],
        "generalized-deficit" => vec![Quantity::GeneralizedDeficit { measure: parse_measure(inline, measure)? }],
        "generalized-discord" => vec![Quantity::GeneralizedDiscord { measure: parse_measure(inline, measure)? }],
        "povm-discord" => match povm_dim {
            Some(d) => vec![Quantity::PovmDiscord { extended_dim: d }],
            None => (da..=da * da).map(|d| Quantity::PovmDiscord { extended_dim: d }).collect(),
        },
        "multipartite-deficit" => vec![Quantity::MultipartiteDeficit { partition: need_partition()? }],
        "multipartite-discord" => vec![Quantity::MultipartiteDiscord { partition: need_partition()? }],
        _ => return Err(CliError::Unsupported(format!("unsupported quantity: {name}"))),
    })
}

/// Bipartite view of a state file. Extra factors are grouped into A, the
/// last factor is B; `--dims` overrides the grouping.
fn bipartite(state: DensityMatrix, dims: Option<&str>) -> Result<DensityMatrix, CliError> {
    if let Some(text) = dims {
        return Ok(state.with_dims(&parse_dims(text)?)?);
    }
    let d = state.dims().to_vec();
    match d.len() {
        0 | 1 => Err(CliError::Input(format!("state has dims {d:?}, expected at least two factors"))),
        2 => Ok(state),
        n => {
            let a: usize = d[..n - 1].iter().product();
            Ok(state.with_dims(&[a, d[n - 1]])?)
        }
    }
}

fn compute_cmd(args: &ComputeArgs) -> Result<u8, CliError> {
    let (file, seed) = args.common.resolve()?;
    let mut config = file.optimizer(seed);
    if let Some(t) = args.tol {
        config.tolerance = t;
    }
    config.oracle_check |= args.oracle;
    config.validate()?;

    let raw = read_state(&args.state)?;
    let multipartite = args.quantity.starts_with("multipartite");
    let partition = match &args.partition {
        Some(p) => Some(parse_partition(p)?),
        None if multipartite && args.dims.is_none() && raw.dims().len() > 2 => {
            Some(raw.dims()[..raw.dims().len() - 1].to_vec())
        }
        None => None,
    };
    let state = bipartite(raw, args.dims.as_deref())?;
    let (da, _) = state.bipartite_dims()?;
    let quantities = parse_quantity(&args.quantity, args.measure.as_deref(), args.povm_dim, partition, da)?;

    let mut report = Report::new(
        "compute",
        &json!({
            "state": args.state.display().to_string(),
            "quantity": args.quantity,
            "dims": state.dims(),
            "optimizer": config,
        }),
        seed,
    );
    let mut best: Option<(f64, usize)> = None;
    let mut all_converged = true;
    for (index, quantity) in quantities.iter().enumerate() {
        let (value, case) = compute_case(&state, quantity, &config, index)?;
        all_converged &= case["converged"].as_bool().unwrap_or(false);
        if best.is_none_or(|(b, _)| value < b) {
            best = Some((value, index));
        }
        report.push_case(case);
    }
    let (value, argmin) = best.expect("at least one quantity");
    let code = if all_converged { 0 } else { NOT_CONVERGED };
    report.set_summary(json!({
        "cases": quantities.len(),
        "value": value,
        "value_text": fixed(value),
        "argmin_case": argmin,
        "converged": all_converged,
        "exit_code": code,
    }));
    report.emit(args.format, args.out.as_deref())?;
    Ok(code)
}

/// One case record. Non-convergence still yields the best value seen.
fn compute_case(
    state: &DensityMatrix,
    quantity: &Quantity,
    config: &OptimizerConfig,
    index: usize,
) -> Result<(f64, serde_json::Value), CliError> {
    let (value, optimization, bases, oracle) = match compute(state, quantity, config) {
        Ok(r) => (r.value, r.optimization, r.bases, r.oracle),
        Err(discord_core::Error::OptimizerDidNotConverge(opt)) => {
            let bases = opt.bases.clone();
            (opt.value.max(0.0), *opt, bases, None)
        }
        Err(e) => return Err(e.into()),
    };
    let best_restarts = optimization.restarts.iter().filter(|r| (r.value - optimization.value).abs() <= 1e-9).count();
    let case = json!({
        "index": index,
        "quantity": quantity.name(),
        "parameters": quantity,
        "value": value,
        "value_text": fixed(value),
        "converged": optimization.converged,
        "bases": bases,
        "diagnostics": {
            "restarts": optimization.restarts.len(),
            "restarts_at_best": best_restarts,
            "evaluations": optimization.evaluations,
            "flat_landscape": optimization.flat_landscape,
            "oracle_value": oracle.as_ref().map(|o| o.oracle_value),
            "oracle_gap": oracle.as_ref().map(|o| o.gap),
        },
        "provenance": quantity.provenance(),
    });
    Ok((value, case))
}

fn verify_cmd(args: &VerifyArgs) -> Result<u8, CliError> {
    let suite: Suite = args.suite.parse()?;
    let (file, seed) = args.common.resolve()?;
    let dims = parse_pair(&args.dims)?;
    let partition = args.partition.as_deref().map(parse_partition).transpose()?;
    let mut options = SuiteOptions::new(args.cases, dims, seed);
    options.config = file.optimizer(seed);
    options.tolerance = args.tol.or(file.suite_tolerance);
    options.povm_dim = args.povm_dim;
    options.partition = partition.clone();
    if let Some(q) = &args.quantity {
        let mut parsed = parse_quantity(q, args.measure.as_deref(), args.povm_dim, partition, dims.0)?;
        if parsed.len() != 1 {
            return Err(CliError::Input(format!("--quantity {q} needs --povm-dim for a suite")));
        }
        options.quantity = parsed.pop();
    }
    let run = run_suite(suite, &options)?;

    let mut report = Report::new(
        "verify",
        &json!({
            "suite": suite,
            "cases": options.cases,
            "dims": [dims.0, dims.1],
            "quantity": options.quantity,
            "partition": options.partition,
            "povm_dim": options.povm_dim,
            "tolerance": run.summary.tolerance,
            "optimizer": options.config,
        }),
        seed,
    );
    for record in &run.records {
        let mut case = serde_json::to_value(record).expect("case records serialize");
        case["provenance"] = json!(suite.provenance());
        report.push_case(case);
    }
    let code = if run.summary.fail == 0 { 0 } else { 1 };
    let mut summary = serde_json::to_value(&run.summary).expect("summary serializes");
    summary["verdict"] = json!(if code == 0 { Verdict::Pass } else { Verdict::Fail });
    summary["exit_code"] = json!(code);
    report.set_summary(summary);
    report.emit(args.format, args.out.as_deref())?;
    Ok(code)
}

fn random_cmd(args: &RandomArgs) -> Result<u8, CliError> {
    let (_, seed) = args.common.resolve()?;
    let (da, db) = parse_pair(&args.dims)?;
    let rank = args.rank.unwrap_or(da * db);
    if matches!(args.kind, Kind::Werner) && (da, db) != (2, 2) {
        return Err(CliError::Input("Werner states are 2x2".into()));
    }
    if matches!(args.kind, Kind::Werner) && !(args.p_step > 0.0 && args.p_step <= 1.0) {
        return Err(CliError::Input(format!("--p-step {} outside (0, 1]", args.p_step)));
    }
    let count = match args.kind {
        Kind::Werner => (1.0 / args.p_step + 1e-9).floor() as usize + 1,
        _ => args.count,
    };
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Output(format!("{}: {e}", args.out.display())))?;

    let label = serde_json::to_value(args.kind).expect("kind serializes");
    let label = label.as_str().expect("kind is a string");
    let mut manifest = Report::new(
        "random",
        &json!({
            "kind": args.kind,
            "dims": [da, db],
            "rank": matches!(args.kind, Kind::Ginibre).then_some(rank),
            "count": count,
            "p_step": matches!(args.kind, Kind::Werner).then_some(args.p_step),
        }),
        seed,
    );
    for i in 0..count {
        let case_seed = derive_seed(seed, label, i as u64);
        let mut p = None;
        let state = match args.kind {
            Kind::Ginibre => ginibre_mixed(&[da, db], rank, case_seed)?,
            Kind::Pure => haar_pure(&[da, db], case_seed)?,
            Kind::Cq => random_cq(da, db, case_seed)?,
            Kind::Werner => {
                let w = (i as f64 * args.p_step).min(1.0);
                p = Some(w);
                werner(w)?
            }
        };
        let name = format!("{label}-{i:04}.json");
        write_state(args.out.join(&name), &state)?;
        let mut case = json!({ "index": i, "file": name, "seed": case_seed });
        if let Some(w) = p {
            case["p"] = json!(w);
        }
        if matches!(args.kind, Kind::Cq) {
            let test = is_classical_quantum(&state, CqTolerance::default());
            case["cq_residual"] = json!(test.residual);
            case["is_cq"] = json!(test.is_cq);
        }
        manifest.push_case(case);
    }
    manifest.set_summary(json!({ "files": count }));
    let path = args.out.join("manifest.jsonl");
    manifest.emit(Format::Records, Some(Path::new(&path)))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compute(a) => compute_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Random(a) => random_cmd(a),
    };
    match result {
        Ok(code) => {
            if code == NOT_CONVERGED {
                eprintln!("qdiscord: optimizer did not converge, best values reported");
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("qdiscord: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
