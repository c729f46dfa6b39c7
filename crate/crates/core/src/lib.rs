//! Quantum discord, one-way information deficit and the entanglement
//! created between a system and its measurement apparatus.
//!
//! Dense complex matrices throughout; all logarithms are base 2.

pub mod channels;
pub mod correlations;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod optimizer;
pub mod random;
pub mod state;
pub mod verify;

pub use channels::{KrausChannel, MonotonicityReport, Verdict};
pub use correlations::{CorrelationResult, Measure, Quantity};
pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use measurement::{ApparatusState, ProjectiveBasis};
pub use optimizer::{OptimizationResult, OptimizerConfig};
pub use state::DensityMatrix;
pub use verify::{Suite, SuiteOptions, SuiteReport};
