use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::{BroadcastError, BroadcastRun, InstanceId, Status};
use crate::ids::NodeId;
use crate::simnet::{NetworkModel, Tick};

#[derive(Clone, Debug)]
struct Instance {
    initiator: NodeId,
    start_deadline: Tick,
    started: Option<(Tick, Vec<u8>)>,
}

/// The ideal broadcast functionality. Agreement holds by construction: only
/// the first value submitted by the initiator is ever released.
#[derive(Clone, Debug)]
pub struct IdealBroadcast {
    delta: Tick,
    instances: BTreeMap<InstanceId, Instance>,
}

impl IdealBroadcast {
    pub fn new(delta: Tick) -> Self {
        IdealBroadcast {
            delta,
            instances: BTreeMap::new(),
        }
    }

    /// Post-GST bound from a start to acceptance at every honest node.
    pub fn t_bb(&self) -> Tick {
        self.delta
    }

    /// Registers an instance that must be started by `start_deadline`.
    pub fn open(&mut self, id: InstanceId, initiator: NodeId, start_deadline: Tick) -> Result<(), BroadcastError> {
        if self.instances.contains_key(&id) {
            return Err(BroadcastError::DuplicateInstance(id));
        }
        self.instances.insert(
            id,
            Instance {
                initiator,
                start_deadline,
                started: None,
            },
        );
        Ok(())
    }

    /// Submits the value. `Ok(false)` means the start came after the
    /// deadline and is ignored.
    pub fn start(&mut self, id: InstanceId, node: NodeId, value: Vec<u8>, now: Tick) -> Result<bool, BroadcastError> {
        let inst = self
            .instances
            .get_mut(&id)
            .ok_or(BroadcastError::UnknownInstance(id))?;
        if inst.initiator != node {
            return Err(BroadcastError::NotInitiator { instance: id, node });
        }
        if inst.started.is_some() {
            return Err(BroadcastError::DuplicateInstance(id));
        }
        if now > inst.start_deadline {
            return Ok(false);
        }
        inst.started = Some((now, value));
        Ok(true)
    }

    /// When nodes give up on an instance that never started.
    pub fn view_timeout(&self, id: InstanceId) -> Option<Tick> {
        self.instances.get(&id).map(|i| i.start_deadline + self.t_bb())
    }

    /// The status every node settles on once the view timeout has passed.
    pub fn outcome(&self, id: InstanceId) -> Status {
        match self.instances.get(&id).and_then(|i| i.started.as_ref()) {
            Some((_, v)) => Status::Accepted(v.clone()),
            None => Status::LeaderFaulty,
        }
    }

    pub fn value(&self, id: InstanceId) -> Option<&[u8]> {
        self.instances
            .get(&id)
            .and_then(|i| i.started.as_ref())
            .map(|(_, v)| v.as_slice())
    }

    /// Delivery times of an accepted value started at `start`.
    pub fn delivery_schedule<R: Rng + ?Sized>(
        &self,
        id: InstanceId,
        net: &NetworkModel,
        rng: &mut R,
        recipients: impl IntoIterator<Item = NodeId>,
    ) -> Vec<(NodeId, Tick)> {
        let Some(inst) = self.instances.get(&id) else {
            return Vec::new();
        };
        let Some((start, _)) = inst.started else {
            return Vec::new();
        };
        recipients
            .into_iter()
            .map(|r| (r, net.delivery_time(rng, start, r == inst.initiator)))
            .collect()
    }
}

/// Runs one instance in isolation. A `None` value models a silent initiator.
pub fn simulate_ideal<R: Rng + ?Sized>(
    n: usize,
    initiator: NodeId,
    value: Option<Vec<u8>>,
    net: &NetworkModel,
    start: Tick,
    start_deadline: Tick,
    honest: &BTreeSet<NodeId>,
    rng: &mut R,
) -> BroadcastRun {
    let id = InstanceId(0);
    let mut bb = IdealBroadcast::new(net.delta);
    bb.open(id, initiator, start_deadline).expect("fresh instance");
    let mut run = BroadcastRun::default();
    if let Some(v) = value {
        bb.start(id, initiator, v, start).expect("first start");
    }
    let recipients = NodeId::all(n).filter(|x| honest.contains(x));
    let timeout = bb.view_timeout(id).unwrap();
    match bb.outcome(id) {
        Status::Accepted(v) => {
            for (node, t) in bb.delivery_schedule(id, net, rng, recipients) {
                run.statuses.insert(node, (Status::Accepted(v.clone()), t));
            }
        }
        status => {
            for node in recipients {
                run.statuses.insert(node, (status.clone(), timeout));
            }
        }
    }
    run
}
