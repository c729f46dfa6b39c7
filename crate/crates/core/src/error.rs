use thiserror::Error;

use crate::optimizer::OptimizationResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },
    #[error("trace is {trace:.12}, expected 1")]
    NonUnitTrace { trace: f64 },
    #[error("NegativeEigenvalue: minimum eigenvalue {value:.3e} is below tolerance")]
    NegativeEigenvalue { value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("partial trace needs at least one kept factor")]
    EmptyKeepSet,
    #[error("factor index {index} out of range for {len} factors")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("support of the first state is not contained in the support of the second")]
    SupportViolation,
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("partition {partition:?} does not multiply to {expected}")]
    PartitionMismatch { partition: Vec<usize>, expected: usize },
    #[error("expected {expected} parameters, got {found}")]
    ParameterCountMismatch { expected: usize, found: usize },
    #[error("basis is not orthonormal (max Gram deviation {deviation:.3e})")]
    NonOrthonormal { deviation: f64 },
    #[error("optimizer did not converge (best value {:.12})", .0.value)]
    OptimizerDidNotConverge(Box<OptimizationResult>),
    #[error("unsupported dimension {0}, the grid oracle only handles qubits")]
    UnsupportedDimension(usize),
    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),
    #[error("unknown suite: {0}")]
    UnknownSuite(String),
    #[error("Kraus operators are not complete (residual {residual:.3e})")]
    IncompleteKraus { residual: f64 },
    #[error("invalid rank {rank} for total dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
