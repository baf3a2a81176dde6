//! Per-role logic for the confirmation round: leader commit and reveal,
//! committee checks and votes, tallying and partial signing, proof
//! aggregation, and client-side verification.

mod client;
mod committee;
mod config;
mod messages;
mod node;
mod roles;

use thiserror::Error;

pub use client::{verify_bundle, ClientVerifier};
pub use committee::{select_committee, CommitteeRoster};
pub use config::{BasePolicy, RoundConfig};
pub use messages::{certified_message, vote_message, Payload, ProofBundle, Reveal, Vote};
pub use node::{Action, BroadcastKind, Decision, Endpoint, Input, NodeMachine, RoundContext};
pub use roles::{check_uncoded, committee_consistency, decode_part_hashes, leader_commit, tally, UncodedCheck};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed message: {0}")]
    Malformed(String),
}
