use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::broadcast::BroadcastCostModel;
use crate::crypto::sha256;
use crate::field_codec::{CodeParams, EvalDomain, MERSENNE61};
use crate::simnet::Tick;

/// Outcome of the underlying coded-chain round, which this crate does not
/// implement. All honest nodes see the same outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasePolicy {
    AlwaysAccept,
    AlwaysReject,
    /// Fair coin per iteration, derived from the seed.
    Coin(u64),
}

impl BasePolicy {
    pub fn outcome(&self, iteration: u32) -> bool {
        match *self {
            BasePolicy::AlwaysAccept => true,
            BasePolicy::AlwaysReject => false,
            BasePolicy::Coin(seed) => {
                sha256(&[b"base-coin", &seed.to_be_bytes(), &iteration.to_be_bytes()])[0] & 1 == 1
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundConfig {
    pub code: CodeParams,
    /// Committee size; odd so the vote always has a strict majority.
    pub lambda: usize,
    pub delta: Tick,
    pub gst: Tick,
    /// Step 3 timeout after Step 1 completes.
    pub tau3: Tick,
    pub base: BasePolicy,
    /// Ticks from iteration start until the base round reports.
    pub base_latency: Tick,
    pub block_num: u64,
    pub max_iterations: u32,
    pub cost: BroadcastCostModel,
}

impl RoundConfig {
    /// `lambda = 5`, `delta = 10`, `GST = 0`, `tau3 = 2 delta`, one iteration.
    pub fn new(code: CodeParams) -> Self {
        RoundConfig {
            code,
            lambda: 5.min(if code.n % 2 == 1 { code.n } else { code.n - 1 }),
            delta: 10,
            gst: 0,
            tau3: 20,
            base: BasePolicy::AlwaysAccept,
            base_latency: 20,
            block_num: 1,
            max_iterations: 1,
            cost: BroadcastCostModel::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::InvalidConfig(m));
        if let Err(e) = self.code.validate() {
            return bad(e.to_string());
        }
        if self.lambda == 0 || self.lambda % 2 == 0 {
            return bad(format!("committee size {} must be odd", self.lambda));
        }
        if self.lambda > self.code.n {
            return bad(format!("committee size {} exceeds N = {}", self.lambda, self.code.n));
        }
        if self.delta == 0 {
            return bad("delta must be positive".into());
        }
        if self.tau3 < 2 * self.delta {
            return bad(format!("tau3 = {} is below 2 delta = {}", self.tau3, 2 * self.delta));
        }
        if self.max_iterations == 0 {
            return bad("need at least one iteration".into());
        }
        if self.code.n > u16::MAX as usize {
            return bad("N must fit in 16 bits".into());
        }
        if let Err(e) = EvalDomain::<MERSENNE61>::new(self.code.n, self.code.k) {
            return bad(e.to_string());
        }
        Ok(())
    }

    /// Step 1 completes one delta after the iteration starts (coded parts
    /// have been distributed).
    pub fn step1_done(&self, start: Tick) -> Tick {
        start + self.delta
    }

    /// Last tick at which the commitment and the votes may be broadcast.
    pub fn broadcast_deadline(&self, start: Tick) -> Tick {
        self.step1_done(start) + self.tau3
    }

    /// Broadcast bound of the ideal functionality.
    pub fn t_bb(&self) -> Tick {
        self.delta
    }

    /// Honest nodes are terminal by `max(start, GST) + t_round()`.
    pub fn t_round(&self) -> Tick {
        (self.delta + self.tau3 + self.t_bb()).max(self.base_latency)
    }
}
