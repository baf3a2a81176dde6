use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;

use super::HarnessError;
use crate::protocol::BroadcastKind;
use crate::simnet::{RoundTrace, TraceEvent};

/// Fixed per-message overhead (addressing, framing, MAC) in bytes.
pub const ENVELOPE_BYTES: usize = 64;

/// Bits an envelope carrying `payload_bytes` costs on the wire.
pub fn envelope_bits(payload_bytes: usize) -> u64 {
    8 * (payload_bytes + ENVELOPE_BYTES) as u64
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Metrics {
    /// `steps[s - 1]` holds Step `s`, envelopes plus modeled broadcast cost.
    pub steps: [u64; 7],
    /// Bits of the per-message envelope overhead, by step.
    pub envelope_overhead: [u64; 7],
    /// Bits spent on tree-proof paths and signer bitmaps, by step. A
    /// constant-size commitment and signature would not pay these.
    pub correction: [u64; 7],
    pub modeled_broadcast_bits: u64,
    pub block_bits: u64,
    pub messages: BTreeMap<&'static str, u64>,
    pub broadcasts: u64,
    #[serde(skip)]
    pub wall_clock: Option<Duration>,
}

impl Metrics {
    pub fn step(&self, s: usize) -> u64 {
        self.steps[s - 1]
    }

    pub fn total(&self) -> u64 {
        self.steps.iter().sum()
    }

    pub fn proof_size_correction(&self) -> u64 {
        self.correction.iter().sum()
    }

    /// Step `s` without envelope overhead or proof-size correction.
    pub fn step_payload(&self, s: usize) -> u64 {
        self.steps[s - 1] - self.envelope_overhead[s - 1] - self.correction[s - 1]
    }
}

fn payload_step(kind: &str) -> Option<usize> {
    Some(match kind {
        "coded_part" => 1,
        "reveal" => 3,
        "hash" => 4,
        "partial_sig" => 6,
        "bundle" => 7,
        _ => return None,
    })
}

fn broadcast_step(kind: BroadcastKind) -> usize {
    match kind {
        BroadcastKind::Commit => 2,
        BroadcastKind::Vote(_) => 5,
    }
}

/// Attributes every envelope and broadcast in `trace` to one step.
pub fn account_bits(trace: &RoundTrace) -> Result<Metrics, HarnessError> {
    let mut m = Metrics {
        block_bits: trace.block_bits,
        ..Metrics::default()
    };
    for e in &trace.events {
        match e {
            TraceEvent::Envelope {
                kind,
                step,
                bytes,
                correction,
                ..
            } => {
                if payload_step(kind) != Some(*step) {
                    return Err(HarnessError::AccountingGap(format!("{kind} envelope claims step {step}")));
                }
                let s = step - 1;
                m.steps[s] += envelope_bits(*bytes);
                m.envelope_overhead[s] += 8 * ENVELOPE_BYTES as u64;
                m.correction[s] += 8 * *correction as u64;
                *m.messages.entry(kind).or_default() += 1;
            }
            TraceEvent::Broadcast {
                instance, modeled_bits, ..
            }
            | TraceEvent::BroadcastTimeout {
                instance, modeled_bits, ..
            } => {
                m.steps[broadcast_step(*instance) - 1] += modeled_bits;
                m.modeled_broadcast_bits += modeled_bits;
                if *modeled_bits > 0 {
                    m.broadcasts += 1;
                }
            }
            _ => {}
        }
    }
    Ok(m)
}
