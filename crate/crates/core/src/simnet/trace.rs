use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use serde::Serialize;

use super::{Strategy, Tick};
use crate::ids::{ClientId, NodeId};
use crate::protocol::{BroadcastKind, Decision, Endpoint, ProofBundle, RoundConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartResult {
    Started,
    /// After the start deadline; ignored by the functionality.
    Late,
    /// A second value for the same instance; ignored.
    Duplicate,
    /// Initiator does not own the instance.
    Foreign,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    IterationStart {
        iteration: u32,
        time: Tick,
        leader: NodeId,
        committee: Vec<NodeId>,
    },
    Step1 {
        iteration: u32,
        time: Tick,
        alpha: u64,
    },
    Envelope {
        iteration: u32,
        send: Tick,
        deliver: Tick,
        src: NodeId,
        dst: Endpoint,
        kind: &'static str,
        step: usize,
        bytes: usize,
        correction: usize,
    },
    Broadcast {
        iteration: u32,
        time: Tick,
        initiator: NodeId,
        instance: BroadcastKind,
        bytes: usize,
        modeled_bits: u64,
        result: StartResult,
    },
    BroadcastTimeout {
        iteration: u32,
        time: Tick,
        instance: BroadcastKind,
        modeled_bits: u64,
    },
    Output {
        iteration: u32,
        time: Tick,
        node: NodeId,
        decision: Decision,
    },
    Adversary {
        iteration: u32,
        time: Tick,
        node: NodeId,
        action: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub start: Tick,
    pub leader: NodeId,
    pub committee: Vec<NodeId>,
    pub base_accepted: bool,
    /// Honest nodes must be terminal by this tick.
    pub deadline: Tick,
    pub outputs: BTreeMap<NodeId, (Decision, Tick)>,
    /// Honest committee members: (verdict, revealed block equals the encoded one).
    pub verdicts: BTreeMap<NodeId, (bool, bool)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClientSummary {
    pub confirmed: usize,
    pub attempts: u64,
    pub discarded: u64,
    pub ignored: u64,
}

/// Everything that happened in one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundTrace {
    pub seed: u64,
    pub config: RoundConfig,
    pub strategy: Strategy,
    pub corrupted: BTreeSet<NodeId>,
    pub g: usize,
    pub block_bits: u64,
    #[serde(skip)]
    pub events: Vec<TraceEvent>,
    pub iterations: Vec<IterationRecord>,
    pub clients: BTreeMap<ClientId, ClientSummary>,
    /// `(transaction index, party)` pairs left without a verified bundle in
    /// an accepted run.
    pub missing_confirmations: Vec<(u32, ClientId)>,
    /// The verified bundle each party holds, by transaction index.
    #[serde(skip)]
    pub confirmations: Vec<(u32, ClientId, ProofBundle)>,
}

impl RoundTrace {
    pub fn honest(&self) -> impl Iterator<Item = NodeId> + '_ {
        NodeId::all(self.config.code.n).filter(|x| !self.corrupted.contains(x))
    }

    pub fn honest_count(&self) -> usize {
        self.config.code.n - self.corrupted.len()
    }

    /// The common decision of the honest nodes, if they all decided alike.
    pub fn iteration_decision(&self, rec: &IterationRecord) -> Option<Decision> {
        let first = rec.outputs.values().next()?.0;
        (rec.outputs.len() == self.honest_count() && rec.outputs.values().all(|(d, _)| *d == first)).then_some(first)
    }

    /// In every iteration all honest nodes decided, and decided alike.
    pub fn agreement(&self) -> bool {
        self.iterations.iter().all(|r| self.iteration_decision(r).is_some())
    }

    pub fn final_decision(&self) -> Option<Decision> {
        self.iterations.last().and_then(|r| self.iteration_decision(r))
    }

    pub fn accepted(&self) -> bool {
        self.final_decision() == Some(Decision::Accept)
    }

    /// 1-based iteration in which the honest nodes accepted.
    pub fn accepting_iteration(&self) -> Option<u32> {
        self.iterations
            .iter()
            .find(|r| self.iteration_decision(r) == Some(Decision::Accept))
            .map(|r| r.iteration)
    }

    /// Every honest node decided by its iteration's deadline.
    pub fn liveness_holds(&self) -> bool {
        self.iterations.iter().all(|r| {
            r.outputs.len() == self.honest_count() && r.outputs.values().all(|&(_, t)| t <= r.deadline)
        })
    }

    /// A true honest verdict implies the revealed block is the encoded one.
    pub fn binding_holds(&self) -> bool {
        self.iterations
            .iter()
            .all(|r| r.verdicts.values().all(|&(verdict, same)| !verdict || same))
    }

    /// Honest-to-honest envelopes sent after GST that took longer than delta.
    pub fn timing_violations(&self) -> usize {
        let (gst, delta) = (self.config.gst, self.config.delta);
        self.events
            .iter()
            .filter(|e| match e {
                TraceEvent::Envelope {
                    send,
                    deliver,
                    src,
                    dst: Endpoint::Node(d),
                    ..
                } => {
                    !self.corrupted.contains(src)
                        && !self.corrupted.contains(d)
                        && *send >= gst
                        && *deliver > *send + delta
                }
                _ => false,
            })
            .count()
    }

    /// One JSON object per line: a summary header, then every event.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }
}
