//! Byzantine broadcast with agreement, validity, termination and liveness.
//!
//! [`IdealBroadcast`] is the functionality the round simulator uses: the first
//! value an initiator submits before its deadline is delivered to everyone,
//! otherwise everyone sees [`Status::LeaderFaulty`] at the view timeout. Its
//! bits are charged by [`BroadcastCostModel`]. [`echo`] is a concrete signed
//! echo protocol used to check that nothing relies on more than the standard
//! guarantees.

pub mod echo;
mod ideal;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::NodeId;

pub use ideal::{simulate_ideal, IdealBroadcast};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InstanceId(pub u64);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Pending,
    Accepted(Vec<u8>),
    LeaderFaulty,
}

impl Status {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, Status::Pending)
    }

    pub fn accepted(&self) -> Option<&[u8]> {
        match self {
            Status::Accepted(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BroadcastError {
    #[error("broadcast instance {0:?} already used")]
    DuplicateInstance(InstanceId),
    #[error("broadcast instance {0:?} is not open")]
    UnknownInstance(InstanceId),
    #[error("{node} is not the initiator of {instance:?}")]
    NotInitiator { instance: InstanceId, node: NodeId },
}

/// Charged bits per instance: `c1 * |value|_bits + c2 * N * ceil(log2 N)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroadcastCostModel {
    pub c1: u64,
    pub c2: u64,
}

impl Default for BroadcastCostModel {
    fn default() -> Self {
        BroadcastCostModel { c1: 1, c2: 64 }
    }
}

pub fn ceil_log2(n: usize) -> u64 {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as u64
    }
}

impl BroadcastCostModel {
    pub fn bits(&self, n: usize, value_len_bytes: usize) -> u64 {
        let l = ceil_log2(n);
        self.c1 * 8 * value_len_bytes as u64 + self.c2 * n as u64 * l * l
    }
}

/// Per-node result of one standalone broadcast run.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BroadcastRun {
    pub statuses: std::collections::BTreeMap<NodeId, (Status, crate::simnet::Tick)>,
    pub messages: u64,
    pub bits: u64,
    pub dropped: u64,
}

impl BroadcastRun {
    /// Distinct values accepted by the listed nodes.
    pub fn accepted_values(&self) -> std::collections::BTreeSet<Vec<u8>> {
        self.statuses
            .values()
            .filter_map(|(s, _)| s.accepted().map(<[u8]>::to_vec))
            .collect()
    }

    pub fn agreement_holds(&self) -> bool {
        self.accepted_values().len() <= 1
    }
}
