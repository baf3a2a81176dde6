use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adversary::{AdversarySpec, Strategy};
use super::beacon::{elect_leader, Beacon};
use super::trace::{ClientSummary, IterationRecord, RoundTrace, StartResult, TraceEvent};
use super::{EventQueue, NetworkModel, SimError, Tick};
use crate::blockdata::{encode_block_parts, partition_block, Block, CodedPart};
use crate::broadcast::{IdealBroadcast, InstanceId, Status};
use crate::crypto::{Commitment, CombinedSignature, HashParams, KeyRegistry};
use crate::field_codec::{EvalDomain, Fe};
use crate::ids::{ClientId, NodeId};
use crate::protocol::{
    select_committee, Action, BroadcastKind, ClientVerifier, CommitteeRoster, Decision, Endpoint, Input,
    NodeMachine, Payload, ProofBundle, RoundConfig, RoundContext, Vote,
};

const MAX_END_CHECKS: u32 = 1000;

enum Event {
    StartIteration(u32),
    Step1(u32),
    Input(u32, NodeId, Input),
    BroadcastTimeout(u32, BroadcastKind),
    EndCheck(u32, u32),
    Client { from: NodeId, to: ClientId, bundle: ProofBundle },
}

struct Iteration {
    leader: NodeId,
    roster: CommitteeRoster,
    machines: Vec<NodeMachine>,
}

struct Sim<'a> {
    ctx: Arc<RoundContext>,
    adv: &'a AdversarySpec,
    block: &'a Block,
    coded: Vec<CodedPart>,
    net: NetworkModel,
    rng: ChaCha8Rng,
    beacon: Beacon,
    queue: EventQueue<Event>,
    bb: IdealBroadcast,
    corrupted: Vec<bool>,
    iters: Vec<Iteration>,
    records: Vec<IterationRecord>,
    clients: BTreeMap<ClientId, ClientVerifier>,
    events: Vec<TraceEvent>,
}

/// Runs one confirmation round (with re-election on reject, up to
/// `cfg.max_iterations`) for `block`. Deterministic in all arguments.
pub fn run_round(cfg: &RoundConfig, adv: &AdversarySpec, block: &Block, seed: u64) -> Result<RoundTrace, SimError> {
    cfg.validate()?;
    let n = cfg.code.n;
    let parts = partition_block(block, cfg.code.k)?;
    let domain = EvalDomain::new(n, cfg.code.k).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let coded = encode_block_parts(&parts, &domain)?;
    let ctx = Arc::new(RoundContext {
        cfg: cfg.clone(),
        registry: KeyRegistry::generate(n, seed),
        domain,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beacon = Beacon::new(seed);

    // The adversary picks its set before the round, here with knowledge of
    // the first leader and committee.
    let mut peek = beacon.clone();
    let leader = elect_leader(&mut peek, n);
    let roster = select_committee(peek.next(), n, cfg.lambda)?;
    let corrupted_set = adv.resolve(n, cfg.code.f, leader, &roster, &mut rng)?;
    let mut corrupted = vec![false; n];
    for id in &corrupted_set {
        corrupted[id.index()] = true;
    }

    let mut sim = Sim {
        ctx,
        adv,
        block,
        coded,
        net: NetworkModel {
            delta: cfg.delta,
            gst: cfg.gst,
            pre_gst: adv.pre_gst,
        },
        rng,
        beacon,
        queue: EventQueue::new(),
        bb: IdealBroadcast::new(cfg.delta),
        corrupted,
        iters: Vec::new(),
        records: Vec::new(),
        clients: BTreeMap::new(),
        events: Vec::new(),
    };
    sim.queue.push(0, Event::StartIteration(1));
    while let Some((now, event)) = sim.queue.pop() {
        sim.step(now, event)?;
    }
    Ok(sim.finish(seed, corrupted_set))
}

impl Sim<'_> {
    fn cfg(&self) -> &RoundConfig {
        &self.ctx.cfg
    }

    fn instance(&self, iteration: u32, kind: BroadcastKind) -> InstanceId {
        let slot = match kind {
            BroadcastKind::Commit => 0,
            BroadcastKind::Vote(m) => m.0 as u64,
        };
        InstanceId(iteration as u64 * (self.cfg().code.n as u64 + 1) + slot)
    }

    fn step(&mut self, now: Tick, event: Event) -> Result<(), SimError> {
        match event {
            Event::StartIteration(it) => self.start_iteration(it, now)?,
            Event::Step1(it) => self.step1(it, now),
            Event::Input(it, node, input) => self.dispatch(it, node, input, now),
            Event::BroadcastTimeout(it, kind) => {
                let id = self.instance(it, kind);
                if self.bb.outcome(id) == Status::LeaderFaulty {
                    let n = self.cfg().code.n;
                    self.events.push(TraceEvent::BroadcastTimeout {
                        iteration: it,
                        time: now,
                        instance: kind,
                        modeled_bits: self.cfg().cost.bits(n, 0),
                    });
                    for node in NodeId::all(n) {
                        let input = Input::Broadcast {
                            kind,
                            status: Status::LeaderFaulty,
                        };
                        self.dispatch(it, node, input, now);
                    }
                }
            }
            Event::EndCheck(it, checks) => self.end_check(it, checks, now),
            Event::Client { from, to, bundle } => {
                let verifier = self.clients.entry(to).or_insert_with(|| ClientVerifier::new(to));
                verifier.receive(&self.ctx.registry, from, &bundle);
            }
        }
        Ok(())
    }

    fn start_iteration(&mut self, it: u32, now: Tick) -> Result<(), SimError> {
        let cfg = self.cfg().clone();
        let n = cfg.code.n;
        let leader = elect_leader(&mut self.beacon, n);
        let roster = select_committee(self.beacon.next(), n, cfg.lambda)?;
        let bad_seats = roster.members.iter().filter(|m| self.corrupted[m.index()]).count();
        if self.adv.require_honest_committee && 2 * bad_seats >= cfg.lambda {
            return Err(SimError::HarnessViolation(format!(
                "iteration {it}: {bad_seats} of {} committee members corrupted",
                cfg.lambda
            )));
        }
        let mut leader_block = self.block.clone();
        if self.corrupted[leader.index()] && self.adv.strategy.equivocates() {
            let i = self.rng.gen_range(0..leader_block.len());
            let tx = &mut leader_block.transactions[i];
            tx.amount = tx.amount.wrapping_add(1);
            self.events.push(TraceEvent::Adversary {
                iteration: it,
                time: now,
                node: leader,
                action: format!("equivocate on transaction {}", i + 1),
            });
        }
        let mut leader_block = Some(leader_block);
        let machines = NodeId::all(n)
            .map(|id| {
                let b = if id == leader { leader_block.take() } else { None };
                NodeMachine::new(self.ctx.clone(), id, leader, b)
            })
            .collect();
        self.events.push(TraceEvent::IterationStart {
            iteration: it,
            time: now,
            leader,
            committee: roster.members.clone(),
        });

        let deadline = cfg.broadcast_deadline(now);
        let kinds: Vec<(BroadcastKind, NodeId)> = std::iter::once((BroadcastKind::Commit, leader))
            .chain(roster.members.iter().map(|&m| (BroadcastKind::Vote(m), m)))
            .collect();
        for (kind, initiator) in kinds {
            let id = self.instance(it, kind);
            self.bb.open(id, initiator, deadline).expect("instance ids are unique per iteration");
            let timeout = self.bb.view_timeout(id).unwrap();
            self.queue.push(timeout, Event::BroadcastTimeout(it, kind));
        }

        let t1 = cfg.step1_done(now);
        self.queue.push(t1, Event::Step1(it));
        for &m in &roster.members {
            self.queue.push(t1 + cfg.tau3, Event::Input(it, m, Input::VoteDeadline));
        }
        let base = cfg.base.outcome(it);
        for node in NodeId::all(n) {
            self.queue.push(now + cfg.base_latency, Event::Input(it, node, Input::BaseDone { accepted: base }));
        }
        let end = now.max(cfg.gst) + cfg.t_round();
        self.queue.push(end, Event::EndCheck(it, 0));

        self.records.push(IterationRecord {
            iteration: it,
            start: now,
            leader,
            committee: roster.members.clone(),
            base_accepted: base,
            deadline: end,
            outputs: BTreeMap::new(),
            verdicts: BTreeMap::new(),
        });
        self.iters.push(Iteration {
            leader,
            roster,
            machines,
        });

        // The base chain hands every node its coded share.
        for i in 0..n {
            let part = self.coded[i].clone();
            self.send(it, leader, Endpoint::Node(part.node), Payload::CodedPart(part), now);
        }
        Ok(())
    }

    fn step1(&mut self, it: u32, now: Tick) {
        let alpha = self.beacon.next_alpha();
        self.events.push(TraceEvent::Step1 {
            iteration: it,
            time: now,
            alpha: alpha.value(),
        });
        let hash_params = HashParams::new(alpha).expect("beacon alpha is nonzero");
        let roster = self.iters[it as usize - 1].roster.clone();
        for node in NodeId::all(self.cfg().code.n) {
            let input = Input::Step1Complete {
                roster: roster.clone(),
                hash_params,
            };
            self.dispatch(it, node, input, now);
        }
        if self.adv.strategy.spams_clients() {
            self.spam_clients(it, now);
        }
    }

    fn spam_clients(&mut self, it: u32, now: Tick) {
        let n = self.cfg().code.n;
        let bad: Vec<NodeId> = NodeId::all(n).filter(|x| self.corrupted[x.index()]).collect();
        let block = self.block;
        for node in bad {
            for (i, tx) in block.transactions.iter().enumerate() {
                for _ in 0..3 {
                    let mut root = [0u8; 32];
                    self.rng.fill(&mut root);
                    let bundle = ProofBundle {
                        block_num: self.cfg().block_num,
                        index: i as u32 + 1,
                        tx: *tx,
                        commitment: Commitment {
                            root,
                            len: block.len() as u32,
                        },
                        proof: crate::crypto::InclusionProof {
                            index: i as u32 + 1,
                            path: vec![[0; 32]; crate::crypto::tree_depth(block.len())],
                        },
                        sig: garbage_signature(n),
                    };
                    self.send(it, node, Endpoint::Client(tx.sender), Payload::Bundle(bundle), now);
                }
            }
        }
    }

    fn dispatch(&mut self, it: u32, node: NodeId, input: Input, now: Tick) {
        let idx = it as usize - 1;
        let mut actions = self.iters[idx].machines[node.index()].handle(input);
        if self.corrupted[node.index()] {
            actions = self.mutate(it, node, actions, now);
        }
        for action in actions {
            match action {
                Action::Send { to, payload } => self.send(it, node, to, payload, now),
                Action::StartBroadcast { kind, value } => self.start_broadcast(it, node, kind, value, now),
                Action::Output(decision) => {
                    self.events.push(TraceEvent::Output {
                        iteration: it,
                        time: now,
                        node,
                        decision,
                    });
                    if !self.corrupted[node.index()] {
                        self.records[idx].outputs.entry(node).or_insert((decision, now));
                    }
                }
            }
        }
    }

    /// Applies the strategy to a corrupted node's honest actions.
    fn mutate(&mut self, it: u32, node: NodeId, actions: Vec<Action>, now: Tick) -> Vec<Action> {
        let st = self.adv.strategy;
        if st == Strategy::Honest {
            return actions;
        }
        let is_leader = node == self.iters[it as usize - 1].leader;
        let mut out = Vec::with_capacity(actions.len());
        let mut notes: Vec<&'static str> = Vec::new();
        for action in actions {
            match action {
                Action::StartBroadcast {
                    kind: BroadcastKind::Commit,
                    ..
                } if is_leader && st.stalls() => notes.push("withhold commitment"),
                Action::Send {
                    payload: Payload::Reveal(_),
                    ..
                } if is_leader && st.stalls() => notes.push("withhold reveal"),
                Action::Send {
                    to,
                    payload: Payload::Reveal(mut r),
                } if is_leader && st.withholds_proofs() => {
                    r.proofs.pop();
                    notes.push("drop last proof");
                    out.push(Action::Send {
                        to,
                        payload: Payload::Reveal(r),
                    });
                }
                Action::StartBroadcast {
                    kind: kind @ BroadcastKind::Vote(_),
                    value,
                } if st.flips_votes() => {
                    let yes = Vote::from_bytes(&value).map(|v| v.yes).unwrap_or(false);
                    let c = self.iters[it as usize - 1].machines[node.index()].commitment().copied();
                    let vote = Vote::cast(&self.ctx.registry, node, !yes, c.as_ref());
                    notes.push("flip vote");
                    out.push(Action::StartBroadcast {
                        kind,
                        value: vote.to_bytes(),
                    });
                }
                Action::Send {
                    to,
                    payload: Payload::Hash(_),
                } if st.bad_hashes() => {
                    notes.push("random hash");
                    out.push(Action::Send {
                        to,
                        payload: Payload::Hash(Fe::new(self.rng.gen())),
                    });
                }
                Action::Send {
                    payload: Payload::PartialSig(_) | Payload::Bundle(_),
                    ..
                } if st.withholds_signatures() => notes.push("withhold signature"),
                other => out.push(other),
            }
        }
        notes.dedup();
        for note in notes {
            self.events.push(TraceEvent::Adversary {
                iteration: it,
                time: now,
                node,
                action: note.to_string(),
            });
        }
        out
    }

    fn send(&mut self, it: u32, src: NodeId, to: Endpoint, payload: Payload, now: Tick) {
        let loopback = to == Endpoint::Node(src);
        let deliver = self.net.delivery_time(&mut self.rng, now, loopback);
        self.events.push(TraceEvent::Envelope {
            iteration: it,
            send: now,
            deliver,
            src,
            dst: to,
            kind: payload.kind(),
            step: payload.step(),
            bytes: payload.encoded_len(),
            correction: payload.correction_len(),
        });
        let event = match (to, payload) {
            (Endpoint::Node(dst), payload) => Event::Input(it, dst, Input::Deliver { from: src, payload }),
            (Endpoint::Client(client), Payload::Bundle(bundle)) => Event::Client {
                from: src,
                to: client,
                bundle,
            },
            (Endpoint::Client(_), _) => return,
        };
        self.queue.push(deliver, event);
    }

    fn start_broadcast(&mut self, it: u32, src: NodeId, kind: BroadcastKind, value: Vec<u8>, now: Tick) {
        let id = self.instance(it, kind);
        let n = self.cfg().code.n;
        let bytes = value.len();
        let result = match self.bb.start(id, src, value.clone(), now) {
            Ok(true) => StartResult::Started,
            Ok(false) => StartResult::Late,
            Err(crate::broadcast::BroadcastError::DuplicateInstance(_)) => StartResult::Duplicate,
            Err(_) => StartResult::Foreign,
        };
        let modeled_bits = if result == StartResult::Started {
            self.cfg().cost.bits(n, bytes)
        } else {
            0
        };
        self.events.push(TraceEvent::Broadcast {
            iteration: it,
            time: now,
            initiator: src,
            instance: kind,
            bytes,
            modeled_bits,
            result,
        });
        if result != StartResult::Started {
            return;
        }
        for (node, at) in self.bb.delivery_schedule(id, &self.net, &mut self.rng, NodeId::all(n)) {
            let status = Status::Accepted(value.clone());
            self.queue.push(at, Event::Input(it, node, Input::Broadcast { kind, status }));
        }
    }

    fn end_check(&mut self, it: u32, checks: u32, now: Tick) {
        let idx = it as usize - 1;
        let honest = self.corrupted.iter().filter(|c| !**c).count();
        let outputs = &self.records[idx].outputs;
        if outputs.len() < honest {
            if checks < MAX_END_CHECKS {
                self.queue.push(now + self.cfg().delta, Event::EndCheck(it, checks + 1));
            }
            return;
        }
        let all_reject = outputs.values().all(|(d, _)| *d == Decision::Reject);
        if all_reject && it < self.cfg().max_iterations {
            self.queue.push(now + 1, Event::StartIteration(it + 1));
        }
    }

    fn finish(mut self, seed: u64, corrupted: BTreeSet<NodeId>) -> RoundTrace {
        for (rec, iter) in self.records.iter_mut().zip(&self.iters) {
            for m in &iter.roster.members {
                let machine = &iter.machines[m.index()];
                if self.corrupted[m.index()] {
                    continue;
                }
                if let Some(v) = machine.verdict() {
                    rec.verdicts.insert(*m, (v, machine.revealed_block() == Some(self.block)));
                }
            }
        }
        let block_num = self.ctx.cfg.block_num;
        let mut trace = RoundTrace {
            seed,
            config: self.ctx.cfg.clone(),
            strategy: self.adv.strategy,
            corrupted,
            g: self.block.len(),
            block_bits: self.block.size_bits(),
            events: std::mem::take(&mut self.events),
            iterations: std::mem::take(&mut self.records),
            clients: BTreeMap::new(),
            missing_confirmations: Vec::new(),
            confirmations: Vec::new(),
        };
        if trace.accepted() {
            for (i, tx) in self.block.transactions.iter().enumerate() {
                let bytes = tx.to_bytes();
                let mut parties = vec![tx.sender];
                if tx.receiver != tx.sender {
                    parties.push(tx.receiver);
                }
                for p in parties {
                    match self.clients.get(&p).and_then(|c| c.confirmation(block_num, &bytes)) {
                        Some(b) => trace.confirmations.push((i as u32 + 1, p, b.clone())),
                        None => trace.missing_confirmations.push((i as u32 + 1, p)),
                    }
                }
            }
        }
        trace.clients = self
            .clients
            .iter()
            .map(|(&id, c)| {
                (
                    id,
                    ClientSummary {
                        confirmed: c.confirmed_count(),
                        attempts: c.attempts(),
                        discarded: c.discarded(),
                        ignored: c.ignored(),
                    },
                )
            })
            .collect();
        trace
    }
}

fn garbage_signature(n: usize) -> CombinedSignature {
    let mut bytes = (n as u16).to_be_bytes().to_vec();
    bytes.extend(std::iter::repeat_n(0xff, n.div_ceil(8)));
    bytes.extend_from_slice(&[0xab; 32]);
    CombinedSignature::from_bytes_prefix(&bytes).expect("well-formed").0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_codec::CodeParams;
    use crate::protocol::BasePolicy;
    use crate::simnet::{Corruption, PreGstPolicy};

    fn setup(n: usize, k: usize, f: usize, g: usize) -> (RoundConfig, Block) {
        let cfg = RoundConfig::new(CodeParams::new(n, k, f, 1).unwrap());
        let block = Block::random(&mut ChaCha8Rng::seed_from_u64(99), 1, g, 20);
        (cfg, block)
    }

    #[test]
    fn honest_round_accepts_and_confirms_everyone() {
        let (cfg, block) = setup(7, 2, 1, 6);
        for seed in 0..20 {
            let t = run_round(&cfg, &AdversarySpec::honest(), &block, seed).unwrap();
            assert!(t.accepted(), "seed {seed}");
            assert!(t.liveness_holds());
            assert!(t.missing_confirmations.is_empty());
            assert_eq!(t.timing_violations(), 0);
            assert_eq!(t.iterations.len(), 1);
        }
    }

    #[test]
    fn base_reject_means_reject() {
        let (mut cfg, block) = setup(7, 2, 1, 6);
        cfg.base = BasePolicy::AlwaysReject;
        let t = run_round(&cfg, &AdversarySpec::honest(), &block, 3).unwrap();
        assert_eq!(t.final_decision(), Some(Decision::Reject));
        assert!(t.clients.is_empty());
    }

    #[test]
    fn equivocating_leader_is_rejected() {
        let (cfg, block) = setup(10, 4, 2, 8);
        let adv = AdversarySpec::new(Strategy::LeaderEquivocate, Corruption::Random { count: 2, include_leader: true });
        for seed in 0..20 {
            let t = run_round(&cfg, &adv, &block, seed).unwrap();
            assert_eq!(t.final_decision(), Some(Decision::Reject), "seed {seed}");
            assert!(t.binding_holds());
            assert!(t.clients.values().all(|c| c.confirmed == 0));
        }
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let (cfg, block) = setup(10, 1, 3, 5);
        let mut adv = AdversarySpec::new(Strategy::Combined, Corruption::Random { count: 3, include_leader: false });
        adv.pre_gst = PreGstPolicy::Reorder;
        let mut cfg = cfg;
        cfg.gst = 40;
        let a = run_round(&cfg, &adv, &block, 5).unwrap().to_jsonl();
        let b = run_round(&cfg, &adv, &block, 5).unwrap().to_jsonl();
        assert_eq!(a, b);
        let c = run_round(&cfg, &adv, &block, 6).unwrap().to_jsonl();
        assert_ne!(a, c);
    }

    #[test]
    fn stalled_leader_is_replaced() {
        let (mut cfg, block) = setup(10, 1, 3, 4);
        cfg.max_iterations = 10;
        let adv = AdversarySpec::new(Strategy::LeaderStall, Corruption::Random { count: 3, include_leader: true });
        for seed in 0..20 {
            let t = run_round(&cfg, &adv, &block, seed).unwrap();
            assert!(t.agreement());
            assert_eq!(t.iteration_decision(&t.iterations[0]), Some(Decision::Reject));
            let it = t.accepting_iteration().expect("an honest leader comes up");
            assert!(!t.corrupted.contains(&t.iterations[it as usize - 1].leader));
            assert!(t.missing_confirmations.is_empty());
        }
    }

    #[test]
    fn messages_held_until_gst_still_terminate() {
        let (mut cfg, block) = setup(7, 2, 1, 6);
        cfg.gst = 100;
        cfg.max_iterations = 3;
        let mut adv = AdversarySpec::honest();
        adv.pre_gst = PreGstPolicy::DeferToGst;
        let t = run_round(&cfg, &adv, &block, 11).unwrap();
        assert!(t.liveness_holds());
        assert!(t.agreement());
        assert_eq!(t.timing_violations(), 0);
    }

    /// Step 3 material held past the vote deadline sinks the first
    /// iteration; the re-elected leader's iteration runs after GST and accepts.
    #[test]
    fn material_held_past_deadline_rejects_then_recovers() {
        let (mut cfg, block) = setup(7, 2, 1, 6);
        cfg.gst = 200;
        cfg.max_iterations = 10;
        let mut adv = AdversarySpec::honest();
        adv.pre_gst = PreGstPolicy::DeferToGst;
        for seed in 0..10 {
            let t = run_round(&cfg, &adv, &block, seed).unwrap();
            let first = &t.iterations[0];
            assert_eq!(t.iteration_decision(first), Some(Decision::Reject), "seed {seed}");
            let accepted = t.accepting_iteration().expect("accepts after GST");
            assert!(t.iterations[accepted as usize - 1].start >= cfg.gst);
            assert!(t.iterations.len() >= 2);
            assert!(t.agreement());
        }
    }

    /// Re-election draws with replacement, so a run of corrupted stalling
    /// leaders has geometric length with ratio `f / N`.
    #[test]
    fn corrupted_leader_streaks_are_geometric() {
        let (mut cfg, block) = setup(10, 2, 2, 4);
        cfg.lambda = 3;
        cfg.max_iterations = 30;
        let adv = AdversarySpec::new(Strategy::LeaderStall, Corruption::Random { count: 2, include_leader: true });
        let runs = 400;
        let mut streaks = 0u32;
        for seed in 0..runs {
            let t = run_round(&cfg, &adv, &block, seed).unwrap();
            let it = t.accepting_iteration().expect("an honest leader eventually appears");
            assert!(t.corrupted.contains(&t.iterations[0].leader));
            assert!(it >= 2);
            assert!(!t.corrupted.contains(&t.iterations[it as usize - 1].leader));
            streaks += it - 1;
        }
        // forced first leader, then mean (f/N)/(1 - f/N) = 0.25 more
        let mean = streaks as f64 / runs as f64;
        assert!((mean - 1.25).abs() < 0.1, "mean streak {mean}");
    }

    #[test]
    fn f_bad_hashes_still_accept() {
        let (cfg, block) = setup(10, 2, 2, 6);
        let adv = AdversarySpec::new(Strategy::NodeBadHash, Corruption::Random { count: 2, include_leader: false });
        for seed in 0..20 {
            let t = run_round(&cfg, &adv, &block, seed).unwrap();
            assert!(t.accepted(), "seed {seed}");
            assert!(t.missing_confirmations.is_empty());
        }
    }

    #[test]
    fn minority_attacks_do_not_break_agreement() {
        let (mut cfg, block) = setup(10, 1, 3, 6);
        cfg.max_iterations = 3;
        for strategy in Strategy::ALL {
            let mut adv = AdversarySpec::new(strategy, Corruption::CommitteeMinority { count: 3, include_leader: false });
            adv.require_honest_committee = true;
            for seed in 0..5 {
                let t = match run_round(&cfg, &adv, &block, seed) {
                    Err(SimError::HarnessViolation(_)) => continue,
                    r => r.unwrap(),
                };
                assert!(t.agreement(), "{strategy} seed {seed}");
                assert!(t.liveness_holds(), "{strategy} seed {seed}");
                if t.accepted() {
                    assert!(t.missing_confirmations.is_empty(), "{strategy} seed {seed}");
                }
                assert!(t.clients.values().all(|c| c.attempts <= 2 * 10 * 6));
            }
        }
    }

    #[test]
    fn over_budget_corruption_is_refused() {
        let (cfg, block) = setup(7, 2, 1, 6);
        let adv = AdversarySpec::new(Strategy::Honest, Corruption::Random { count: 2, include_leader: false });
        assert!(matches!(run_round(&cfg, &adv, &block, 0), Err(SimError::HarnessViolation(_))));
    }
}
