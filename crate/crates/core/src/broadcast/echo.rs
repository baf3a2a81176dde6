//! Signed-echo broadcast.
//!
//! The initiator signs its value and sends it to everyone. A node echoes the
//! first initiator-signed value it sees (from the initiator or inside an
//! echo), accepts once `N - f` distinct nodes echoed the same value, and
//! declares the initiator faulty on seeing two signed values or when the view
//! timer fires. Two quorums of `N - f` overlap in an honest node, and honest
//! nodes echo once, so accepted values agree.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{BroadcastRun, InstanceId, Status};
use crate::crypto::{KeyRegistry, Signature};
use crate::ids::NodeId;
use crate::simnet::{EventQueue, NetworkModel, Tick};

const VALUE_DOMAIN: &[u8] = b"coded-confirm/bb-value";
const ECHO_DOMAIN: &[u8] = b"coded-confirm/bb-echo";
const ENVELOPE_BYTES: u64 = 64;

fn signed_bytes(domain: &[u8], instance: InstanceId, value: &[u8]) -> Vec<u8> {
    let mut m = Vec::with_capacity(domain.len() + 8 + value.len());
    m.extend_from_slice(domain);
    m.extend_from_slice(&instance.0.to_be_bytes());
    m.extend_from_slice(value);
    m
}

/// Post-GST bound from the initiator's start to acceptance everywhere.
pub fn t_bb(delta: Tick) -> Tick {
    2 * delta
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EchoMsg {
    Value {
        value: Vec<u8>,
        init_sig: Signature,
    },
    Echo {
        value: Vec<u8>,
        init_sig: Signature,
        echo_sig: Signature,
    },
}

impl EchoMsg {
    pub fn value(&self) -> &[u8] {
        match self {
            EchoMsg::Value { value, .. } | EchoMsg::Echo { value, .. } => value,
        }
    }

    /// instance (8) || kind (1) || value length (4) || value || signatures
    pub fn encoded_len(&self) -> usize {
        let sigs = match self {
            EchoMsg::Value { .. } => 1,
            EchoMsg::Echo { .. } => 2,
        };
        8 + 1 + 4 + self.value().len() + sigs * Signature::ENCODED_LEN
    }
}

/// One node's view of one instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EchoNode {
    me: NodeId,
    n: usize,
    f: usize,
    instance: InstanceId,
    initiator: NodeId,
    signed: BTreeSet<Vec<u8>>,
    echoed: Option<Vec<u8>>,
    echoes: BTreeMap<NodeId, Vec<u8>>,
    status: Status,
    dropped: u64,
}

impl EchoNode {
    pub fn new(me: NodeId, n: usize, f: usize, instance: InstanceId, initiator: NodeId) -> Self {
        EchoNode {
            me,
            n,
            f,
            instance,
            initiator,
            signed: BTreeSet::new(),
            echoed: None,
            echoes: BTreeMap::new(),
            status: Status::Pending,
            dropped: 0,
        }
    }

    /// The initiator's opening message.
    pub fn initiate(reg: &KeyRegistry, instance: InstanceId, initiator: NodeId, value: Vec<u8>) -> EchoMsg {
        let init_sig = reg
            .sign(initiator, &signed_bytes(VALUE_DOMAIN, instance, &value))
            .expect("initiator is registered");
        EchoMsg::Value { value, init_sig }
    }

    /// A (possibly Byzantine) echo of `value` by `echoer`.
    pub fn forge_echo(reg: &KeyRegistry, instance: InstanceId, echoer: NodeId, value: &[u8], init_sig: Signature) -> EchoMsg {
        EchoMsg::Echo {
            value: value.to_vec(),
            init_sig,
            echo_sig: reg
                .sign(echoer, &signed_bytes(ECHO_DOMAIN, instance, value))
                .expect("echoer is registered"),
        }
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Handles one message; returns messages to send to every node.
    pub fn deliver(&mut self, reg: &KeyRegistry, msg: &EchoMsg) -> Vec<EchoMsg> {
        if self.status.is_terminal() {
            return Vec::new();
        }
        let (value, init_sig, echo_sig) = match msg {
            EchoMsg::Value { value, init_sig } => (value, init_sig, None),
            EchoMsg::Echo {
                value,
                init_sig,
                echo_sig,
            } => (value, init_sig, Some(echo_sig)),
        };
        let init_ok = init_sig.signer == self.initiator
            && reg.verify(&signed_bytes(VALUE_DOMAIN, self.instance, value), init_sig, self.initiator);
        let echo_ok = echo_sig.is_none_or(|s| {
            reg.verify(&signed_bytes(ECHO_DOMAIN, self.instance, value), s, s.signer)
        });
        if !init_ok || !echo_ok {
            self.dropped += 1;
            return Vec::new();
        }
        self.signed.insert(value.clone());
        if self.signed.len() > 1 {
            self.status = Status::LeaderFaulty;
            return Vec::new();
        }
        let mut out = Vec::new();
        if self.echoed.is_none() {
            self.echoed = Some(value.clone());
            out.push(Self::forge_echo(reg, self.instance, self.me, value, *init_sig));
        }
        if let Some(s) = echo_sig {
            self.echoes.entry(s.signer).or_insert_with(|| value.clone());
        }
        let support = self.echoes.values().filter(|v| *v == value).count();
        if support >= self.n - self.f {
            self.status = Status::Accepted(value.clone());
        }
        out
    }

    pub fn timeout(&mut self) {
        if !self.status.is_terminal() {
            self.status = Status::LeaderFaulty;
        }
    }

    /// Exact small encoding of the state when at most two values exist.
    fn compact(&self, values: &[Vec<u8>]) -> u64 {
        let code = |v: &Vec<u8>| values.iter().position(|x| x == v).unwrap() as u64 + 1;
        let status = match &self.status {
            Status::Pending => 0,
            Status::Accepted(v) => code(v),
            Status::LeaderFaulty => 3,
        };
        let mut key = status | self.echoed.as_ref().map_or(0, code) << 2;
        for v in &self.signed {
            key |= 1 << (3 + code(v));
        }
        for (id, v) in &self.echoes {
            key |= code(v) << (6 + 2 * id.index());
        }
        key
    }
}

/// A standalone echo run. The initiator is honest unless it is listed in
/// `byzantine`; a Byzantine initiator signs every entry of
/// `byzantine_values` (none means silent) and sends each honest node a
/// random nonempty subset, while every Byzantine node echoes random values
/// to random honest nodes.
#[derive(Clone, Debug)]
pub struct EchoScenario {
    pub n: usize,
    pub f: usize,
    pub initiator: NodeId,
    pub byzantine: BTreeSet<NodeId>,
    pub honest_value: Vec<u8>,
    pub byzantine_values: Vec<Vec<u8>>,
    pub net: NetworkModel,
    pub start: Tick,
    pub start_deadline: Tick,
}

enum Event {
    Deliver(NodeId, EchoMsg),
    Timeout(NodeId),
}

pub fn simulate_echo<R: Rng + ?Sized>(reg: &KeyRegistry, sc: &EchoScenario, rng: &mut R) -> BroadcastRun {
    let instance = InstanceId(0);
    let honest: Vec<NodeId> = NodeId::all(sc.n).filter(|x| !sc.byzantine.contains(x)).collect();
    let mut nodes: BTreeMap<NodeId, EchoNode> = honest
        .iter()
        .map(|&id| (id, EchoNode::new(id, sc.n, sc.f, instance, sc.initiator)))
        .collect();
    let mut run = BroadcastRun::default();
    let mut queue = EventQueue::new();
    let send = |queue: &mut EventQueue<Event>, run: &mut BroadcastRun, rng: &mut R, from: NodeId, to: NodeId, msg: EchoMsg, now: Tick| {
        run.messages += 1;
        run.bits += (ENVELOPE_BYTES + msg.encoded_len() as u64) * 8;
        let at = sc.net.delivery_time(rng, now, from == to);
        queue.push(at, Event::Deliver(to, msg));
    };

    if sc.byzantine.contains(&sc.initiator) {
        let signed: Vec<EchoMsg> = sc
            .byzantine_values
            .iter()
            .map(|v| EchoNode::initiate(reg, instance, sc.initiator, v.clone()))
            .collect();
        if !signed.is_empty() {
            for &h in &honest {
                let take = rng.gen_range(1..=signed.len());
                for m in signed.choose_multiple(rng, take) {
                    send(&mut queue, &mut run, rng, sc.initiator, h, m.clone(), sc.start);
                }
            }
            for &b in &sc.byzantine {
                for &h in &honest {
                    if rng.gen_bool(0.5) {
                        let m = signed.choose(rng).unwrap();
                        let EchoMsg::Value { value, init_sig } = m else { unreachable!() };
                        let echo = EchoNode::forge_echo(reg, instance, b, value, *init_sig);
                        send(&mut queue, &mut run, rng, b, h, echo, sc.start);
                    }
                }
            }
        }
    } else {
        let m = EchoNode::initiate(reg, instance, sc.initiator, sc.honest_value.clone());
        for to in NodeId::all(sc.n) {
            send(&mut queue, &mut run, rng, sc.initiator, to, m.clone(), sc.start);
        }
    }
    // one tick past the bound so an on-time acceptance always wins the tie
    let timeout = sc.start_deadline + t_bb(sc.net.delta) + 1;
    for &h in &honest {
        queue.push(timeout, Event::Timeout(h));
    }

    while let Some((now, event)) = queue.pop() {
        let (id, out) = match event {
            Event::Deliver(to, msg) => match nodes.get_mut(&to) {
                Some(node) => (to, node.deliver(reg, &msg)),
                None => continue,
            },
            Event::Timeout(id) => {
                nodes.get_mut(&id).unwrap().timeout();
                (id, Vec::new())
            }
        };
        let status = nodes[&id].status().clone();
        if status.is_terminal() && !run.statuses.contains_key(&id) {
            run.statuses.insert(id, (status, now));
        }
        for msg in out {
            for to in NodeId::all(sc.n) {
                send(&mut queue, &mut run, rng, id, to, msg.clone(), now);
            }
        }
    }
    run.dropped = nodes.values().map(EchoNode::dropped).sum();
    run
}

/// Result of [`explore_all_schedules`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationReport {
    pub states: usize,
    pub leaves: usize,
    pub violations: usize,
    /// Distinct outcome vectors seen at leaves, as honest-node statuses.
    pub outcomes: BTreeSet<Vec<Status>>,
}

struct Explorer<'a> {
    reg: &'a KeyRegistry,
    values: Vec<Vec<u8>>,
    honest: Vec<NodeId>,
    table: Vec<(usize, EchoMsg)>,
    ids: HashMap<(usize, EchoMsg), usize>,
    seen: HashSet<(Vec<u64>, u128)>,
    report: ExplorationReport,
}

impl Explorer<'_> {
    fn intern(&mut self, dst: usize, msg: EchoMsg) -> u128 {
        let next = self.table.len();
        let id = *self.ids.entry((dst, msg.clone())).or_insert_with(|| {
            self.table.push((dst, msg));
            next
        });
        assert!(id < 128, "message table overflow");
        1u128 << id
    }

    fn dfs(&mut self, nodes: Vec<EchoNode>, mut pending: u128) {
        // Terminal nodes ignore input, so their pending messages are irrelevant.
        for id in 0..self.table.len() {
            if pending >> id & 1 == 1 && nodes[self.table[id].0].status().is_terminal() {
                pending &= !(1 << id);
            }
        }
        let key = (nodes.iter().map(|s| s.compact(&self.values)).collect(), pending);
        if !self.seen.insert(key) {
            return;
        }
        self.report.states += 1;
        let accepted: BTreeSet<&[u8]> = nodes.iter().filter_map(|s| s.status().accepted()).collect();
        if accepted.len() > 1 {
            self.report.violations += 1;
        }
        let mut leaf = true;
        for id in 0..self.table.len() {
            if pending >> id & 1 == 0 {
                continue;
            }
            leaf = false;
            let (dst, msg) = self.table[id].clone();
            let mut next = nodes.clone();
            let out = next[dst].deliver(self.reg, &msg);
            let mut p = pending & !(1 << id);
            for m in out {
                for d in 0..self.honest.len() {
                    p |= self.intern(d, m.clone());
                }
            }
            self.dfs(next, p);
        }
        for i in 0..nodes.len() {
            if !nodes[i].status().is_terminal() {
                leaf = false;
                let mut next = nodes.clone();
                next[i].timeout();
                self.dfs(next, pending);
            }
        }
        if leaf {
            self.report.leaves += 1;
            self.report.outcomes.insert(nodes.iter().map(|s| s.status().clone()).collect());
        }
    }
}

/// Explores every delivery order and timeout placement for an equivocating
/// initiator (node 1) with Byzantine nodes `1..=f`. The Byzantine side sends
/// everything it can: both signed values and echoes of both to every honest
/// node.
pub fn explore_all_schedules(n: usize, f: usize) -> ExplorationReport {
    assert!(f >= 1 && n > 3 * f && n <= 20);
    let reg = KeyRegistry::generate(n, 0);
    let instance = InstanceId(0);
    let initiator = NodeId(1);
    let honest: Vec<NodeId> = NodeId::all(n).skip(f).collect();
    let values = vec![b"v0".to_vec(), b"v1".to_vec()];
    let mut ex = Explorer {
        reg: &reg,
        values: values.clone(),
        honest: honest.clone(),
        table: Vec::new(),
        ids: HashMap::new(),
        seen: HashSet::new(),
        report: ExplorationReport {
            states: 0,
            leaves: 0,
            violations: 0,
            outcomes: BTreeSet::new(),
        },
    };
    let mut pending = 0u128;
    for v in &values {
        let m = EchoNode::initiate(&reg, instance, initiator, v.clone());
        let EchoMsg::Value { init_sig, .. } = &m else { unreachable!() };
        for d in 0..honest.len() {
            pending |= ex.intern(d, m.clone());
            for b in NodeId::all(f) {
                pending |= ex.intern(d, EchoNode::forge_echo(&reg, instance, b, v, *init_sig));
            }
        }
    }
    let nodes = honest
        .iter()
        .map(|&id| EchoNode::new(id, n, f, instance, initiator))
        .collect();
    ex.dfs(nodes, pending);
    ex.report
}
