use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Tick;

/// How the adversary schedules messages sent before GST.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreGstPolicy {
    /// Same as after GST.
    Synchronous,
    /// Hold everything until GST.
    DeferToGst,
    /// Fixed lag, capped at `GST + delta`.
    FixedLag(Tick),
    /// Uniform over `(send, GST + delta]`, which reorders freely.
    Reorder,
}

/// Partial-synchrony delay model. Every message sent at `t` arrives by
/// `max(t, GST) + delta`; messages to oneself arrive immediately.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub delta: Tick,
    pub gst: Tick,
    pub pre_gst: PreGstPolicy,
}

impl NetworkModel {
    pub fn synchronous(delta: Tick) -> Self {
        NetworkModel {
            delta,
            gst: 0,
            pre_gst: PreGstPolicy::Synchronous,
        }
    }

    pub fn delivery_time<R: Rng + ?Sized>(&self, rng: &mut R, send: Tick, loopback: bool) -> Tick {
        if loopback {
            return send;
        }
        let delta = self.delta.max(1);
        let post = |rng: &mut R| send + rng.gen_range(1..=delta);
        if send >= self.gst {
            return post(rng);
        }
        let bound = self.gst + delta;
        match self.pre_gst {
            PreGstPolicy::Synchronous => post(rng),
            PreGstPolicy::DeferToGst => self.gst + rng.gen_range(1..=delta),
            PreGstPolicy::FixedLag(lag) => (send + lag.max(1)).min(bound),
            PreGstPolicy::Reorder => rng.gen_range(send + 1..=bound),
        }
    }

    /// Latest arrival for a message sent at `send`.
    pub fn deadline(&self, send: Tick) -> Tick {
        send.max(self.gst) + self.delta.max(1)
    }
}
