use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::roles::{check_uncoded, committee_consistency, leader_commit, tally, UncodedCheck};
use super::{certified_message, CommitteeRoster, Payload, ProofBundle, Reveal, RoundConfig, Vote};
use crate::blockdata::{Block, CodedPart};
use crate::broadcast::Status;
use crate::crypto::{poly_hash, Commitment, HashParams, KeyRegistry, PartialSignature};
use crate::field_codec::{EvalDomain, Fe, MERSENNE61};
use crate::ids::{ClientId, NodeId};

/// Shared, immutable per-run data.
#[derive(Debug)]
pub struct RoundContext {
    pub cfg: RoundConfig,
    pub registry: KeyRegistry,
    pub domain: EvalDomain<MERSENNE61>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    Node(NodeId),
    Client(ClientId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BroadcastKind {
    Commit,
    Vote(NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Clone, Debug)]
pub enum Input {
    Deliver { from: NodeId, payload: Payload },
    Step1Complete { roster: CommitteeRoster, hash_params: HashParams<MERSENNE61> },
    Broadcast { kind: BroadcastKind, status: Status },
    BaseDone { accepted: bool },
    /// `tau3` after Step 1; committee members stop waiting for material.
    VoteDeadline,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Send { to: Endpoint, payload: Payload },
    StartBroadcast { kind: BroadcastKind, value: Vec<u8> },
    Output(Decision),
}

/// One node's state for one iteration. Every node runs the same machine;
/// the leader additionally holds the block and committee members
/// additionally check, vote and aggregate.
#[derive(Clone, Debug)]
pub struct NodeMachine {
    ctx: Arc<RoundContext>,
    me: NodeId,
    leader: NodeId,
    leader_block: Option<Block>,
    roster: Option<CommitteeRoster>,
    hash_params: Option<HashParams<MERSENNE61>>,
    coded_part: Option<CodedPart>,
    hash_sent: bool,
    commitment: Option<Option<Commitment>>,
    reveal: Option<Reveal>,
    step3: Option<UncodedCheck>,
    hashes: Vec<(NodeId, Fe)>,
    deadline_passed: bool,
    vote: Option<bool>,
    votes: BTreeMap<NodeId, Status>,
    base: Option<bool>,
    output: Option<Decision>,
    partials: BTreeMap<NodeId, PartialSignature>,
    aggregated: bool,
}

impl NodeMachine {
    /// `leader_block` is the block the leader will commit to and reveal.
    pub fn new(ctx: Arc<RoundContext>, me: NodeId, leader: NodeId, leader_block: Option<Block>) -> Self {
        NodeMachine {
            ctx,
            me,
            leader,
            leader_block,
            roster: None,
            hash_params: None,
            coded_part: None,
            hash_sent: false,
            commitment: None,
            reveal: None,
            step3: None,
            hashes: Vec::new(),
            deadline_passed: false,
            vote: None,
            votes: BTreeMap::new(),
            base: None,
            output: None,
            partials: BTreeMap::new(),
            aggregated: false,
        }
    }

    pub fn id(&self) -> NodeId {
        self.me
    }

    pub fn output(&self) -> Option<Decision> {
        self.output
    }

    pub fn is_member(&self) -> bool {
        self.roster.as_ref().is_some_and(|r| r.contains(self.me))
    }

    /// The Step 3-4 verdict this member voted on.
    pub fn verdict(&self) -> Option<bool> {
        self.vote
    }

    pub fn revealed_block(&self) -> Option<&Block> {
        self.reveal.as_ref().map(|r| &r.block)
    }

    pub fn commitment(&self) -> Option<&Commitment> {
        self.commitment.as_ref().and_then(Option::as_ref)
    }

    pub fn has_aggregated(&self) -> bool {
        self.aggregated
    }

    pub fn handle(&mut self, input: Input) -> Vec<Action> {
        let mut out = Vec::new();
        match input {
            Input::Deliver { from, payload } => self.receive(from, payload),
            Input::Step1Complete { roster, hash_params } => {
                if self.roster.is_none() {
                    self.roster = Some(roster);
                    self.hash_params = Some(hash_params);
                    self.lead(&mut out);
                }
            }
            Input::Broadcast { kind, status } if status.is_terminal() => match kind {
                BroadcastKind::Commit => {
                    if self.commitment.is_none() {
                        let c = status.accepted().and_then(|b| Commitment::from_bytes(b).ok());
                        self.commitment = Some(c);
                    }
                }
                BroadcastKind::Vote(m) => {
                    self.votes.entry(m).or_insert(status);
                }
            },
            Input::Broadcast { .. } => {}
            Input::BaseDone { accepted } => {
                self.base.get_or_insert(accepted);
            }
            Input::VoteDeadline => self.deadline_passed = true,
        }
        self.progress(&mut out);
        out
    }

    fn receive(&mut self, from: NodeId, payload: Payload) {
        match payload {
            Payload::CodedPart(p) => {
                if from == self.leader && p.node == self.me && self.coded_part.is_none() {
                    self.coded_part = Some(p);
                }
            }
            Payload::Reveal(r) => {
                if from == self.leader && self.reveal.is_none() {
                    self.reveal = Some(r);
                }
            }
            Payload::Hash(h) => {
                if !self.hashes.iter().any(|&(id, _)| id == from) {
                    self.hashes.push((from, h));
                }
            }
            Payload::PartialSig(p) => {
                if p.signer == from {
                    self.partials.entry(from).or_insert(p);
                }
            }
            Payload::Bundle(_) => {}
        }
    }

    /// Steps 2 and 3 for the leader, in the honest order.
    fn lead(&mut self, out: &mut Vec<Action>) {
        if self.me != self.leader {
            return;
        }
        let (Some(block), Some(roster)) = (&self.leader_block, &self.roster) else {
            return;
        };
        let Ok((c, proofs)) = leader_commit(block) else {
            return;
        };
        out.push(Action::StartBroadcast {
            kind: BroadcastKind::Commit,
            value: c.to_bytes().to_vec(),
        });
        for &m in &roster.members {
            out.push(Action::Send {
                to: Endpoint::Node(m),
                payload: Payload::Reveal(Reveal {
                    block: block.clone(),
                    proofs: proofs.clone(),
                }),
            });
        }
    }

    fn progress(&mut self, out: &mut Vec<Action>) {
        self.send_hash(out);
        if self.is_member() && self.vote.is_none() {
            if let Some(yes) = self.try_verdict() {
                self.vote = Some(yes);
                let vote = Vote::cast(&self.ctx.registry, self.me, yes, self.commitment());
                out.push(Action::StartBroadcast {
                    kind: BroadcastKind::Vote(self.me),
                    value: vote.to_bytes(),
                });
            }
        }
        self.decide(out);
        self.aggregate(out);
    }

    fn send_hash(&mut self, out: &mut Vec<Action>) {
        if self.hash_sent {
            return;
        }
        let (Some(roster), Some(params), Some(part)) = (&self.roster, &self.hash_params, &self.coded_part) else {
            return;
        };
        let Ok(h) = poly_hash(&part.data, params) else {
            return;
        };
        self.hash_sent = true;
        for &m in &roster.members {
            out.push(Action::Send {
                to: Endpoint::Node(m),
                payload: Payload::Hash(h),
            });
        }
    }

    fn try_verdict(&mut self) -> Option<bool> {
        let waiting = if self.deadline_passed { Some(false) } else { None };
        let c = match &self.commitment {
            None => return waiting,
            Some(None) => return Some(false),
            Some(Some(c)) => *c,
        };
        if self.step3.is_none() {
            self.step3 = self.reveal.as_ref().map(|r| check_uncoded(&c, r));
        }
        match self.step3 {
            Some(UncodedCheck::Fail) => Some(false),
            Some(UncodedCheck::Pass) => {
                let code = &self.ctx.cfg.code;
                if self.hashes.len() < code.n - code.f {
                    return waiting;
                }
                let block = &self.reveal.as_ref().unwrap().block;
                let params = self.hash_params.as_ref().unwrap();
                Some(committee_consistency(&self.hashes, block, params, code, &self.ctx.domain))
            }
            _ => waiting,
        }
    }

    /// Step 6.
    fn decide(&mut self, out: &mut Vec<Action>) {
        if self.output.is_some() || self.commitment.is_none() {
            return;
        }
        let (Some(roster), Some(base)) = (&self.roster, self.base) else {
            return;
        };
        if !roster.members.iter().all(|m| self.votes.contains_key(m)) {
            return;
        }
        let c = self.commitment();
        let (yes, _) = tally(&self.ctx.registry, roster, &self.votes, c);
        let decision = match c {
            Some(c) if base && 2 * yes > roster.len() => {
                let msg = certified_message(c, self.ctx.cfg.block_num);
                let partial = self
                    .ctx
                    .registry
                    .threshold_sign(self.me, &msg)
                    .expect("node is registered");
                for &m in &roster.members {
                    out.push(Action::Send {
                        to: Endpoint::Node(m),
                        payload: Payload::PartialSig(partial),
                    });
                }
                Decision::Accept
            }
            _ => Decision::Reject,
        };
        self.output = Some(decision);
        out.push(Action::Output(decision));
    }

    /// Step 7: once `t + 1` valid partials are in, send every client its bundle.
    fn aggregate(&mut self, out: &mut Vec<Action>) {
        if self.aggregated || !self.is_member() || self.step3 != Some(UncodedCheck::Pass) {
            return;
        }
        let (Some(c), Some(reveal)) = (self.commitment(), &self.reveal) else {
            return;
        };
        let reg = &self.ctx.registry;
        if self.partials.len() < reg.threshold() + 1 {
            return;
        }
        let msg = certified_message(c, self.ctx.cfg.block_num);
        let valid: Vec<PartialSignature> = self
            .partials
            .values()
            .filter(|p| reg.verify_partial(&msg, p))
            .copied()
            .collect();
        if valid.len() < reg.threshold() + 1 {
            return;
        }
        let Ok(sig) = reg.combine(&msg, &valid) else {
            return;
        };
        for (i, (tx, proof)) in reveal.block.transactions.iter().zip(&reveal.proofs).enumerate() {
            let bundle = ProofBundle {
                block_num: self.ctx.cfg.block_num,
                index: i as u32 + 1,
                tx: *tx,
                commitment: *c,
                proof: proof.clone(),
                sig: sig.clone(),
            };
            out.push(Action::Send {
                to: Endpoint::Client(tx.sender),
                payload: Payload::Bundle(bundle.clone()),
            });
            if tx.receiver != tx.sender {
                out.push(Action::Send {
                    to: Endpoint::Client(tx.receiver),
                    payload: Payload::Bundle(bundle),
                });
            }
        }
        self.aggregated = true;
    }
}
