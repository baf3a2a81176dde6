//! Deterministic discrete-event simulation of the confirmation round under
//! partial synchrony, with a static adversary.

mod adversary;
mod beacon;
mod network;
mod queue;
mod sim;
mod trace;

use thiserror::Error;

pub use adversary::{AdversarySpec, Corruption, Strategy};
pub use beacon::{elect_leader, Beacon};
pub use network::{NetworkModel, PreGstPolicy};
pub use queue::{EventQueue, Tick};
pub use sim::run_round;
pub use trace::{ClientSummary, IterationRecord, RoundTrace, StartResult, TraceEvent};

use crate::blockdata::BlockError;
use crate::protocol::ProtocolError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// The test setup asked for more corruption than the model allows.
    #[error("harness violation: {0}")]
    HarnessViolation(String),
    #[error(transparent)]
    Block(#[from] BlockError),
}

impl From<ProtocolError> for SimError {
    fn from(e: ProtocolError) -> Self {
        SimError::InvalidConfig(e.to_string())
    }
}
