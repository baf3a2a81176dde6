//! Bit accounting, committee-failure analytics, parameter sweeps and the CLI.

pub mod cli;
mod metrics;
mod prob;
mod sweep;

use thiserror::Error;

pub use metrics::{account_bits, envelope_bits, Metrics, ENVELOPE_BYTES};
pub use prob::{committee_failure_prob, hypergeometric_failure_prob, scientific, FailureBound};
pub use sweep::{
    complexity_fit, complexity_sweep, leader_strategy, n_log2sq, outcome_label, run_sweep, sweep_block, write_csv,
    ComplexityFit, ExperimentConfig, FRule, KRule, SweepPoint, SweepRow,
};

use crate::simnet::SimError;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// An envelope that no step counter claims. Always a bug.
    #[error("accounting gap: {0}")]
    AccountingGap(String),
    #[error("need at least 4 sweep points over 3 distinct N, got {0}")]
    InsufficientPoints(usize),
    #[error("bad experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
