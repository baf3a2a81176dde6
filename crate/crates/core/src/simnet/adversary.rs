use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::network::PreGstPolicy;
use super::SimError;
use crate::ids::NodeId;
use crate::protocol::CommitteeRoster;

/// What corrupted nodes do. Corrupted nodes otherwise run the honest code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Honest,
    /// A corrupted leader commits to and reveals `B'`, which differs from
    /// the encoded block in one transaction.
    LeaderEquivocate,
    /// A corrupted leader leaves the last proof out of its reveal.
    LeaderWithholdProofs,
    /// A corrupted leader neither broadcasts `C` nor reveals.
    LeaderStall,
    /// Corrupted committee members vote against their verdict.
    CommitteeFalseVote,
    /// Corrupted nodes send random hashes.
    NodeBadHash,
    /// Corrupted nodes send no partial signatures and no bundles.
    NodeWithholdSignature,
    /// Equivocation, false votes, bad hashes, withheld signatures, and
    /// garbage bundles to clients.
    Combined,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::Honest,
        Strategy::LeaderEquivocate,
        Strategy::LeaderWithholdProofs,
        Strategy::LeaderStall,
        Strategy::CommitteeFalseVote,
        Strategy::NodeBadHash,
        Strategy::NodeWithholdSignature,
        Strategy::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Honest => "honest",
            Strategy::LeaderEquivocate => "leader-equivocate",
            Strategy::LeaderWithholdProofs => "leader-withhold-proofs",
            Strategy::LeaderStall => "leader-stall",
            Strategy::CommitteeFalseVote => "committee-false-vote",
            Strategy::NodeBadHash => "node-bad-hash",
            Strategy::NodeWithholdSignature => "node-withhold-signature",
            Strategy::Combined => "combined",
        }
    }

    pub(crate) fn equivocates(self) -> bool {
        matches!(self, Strategy::LeaderEquivocate | Strategy::Combined)
    }
    pub(crate) fn withholds_proofs(self) -> bool {
        self == Strategy::LeaderWithholdProofs
    }
    pub(crate) fn stalls(self) -> bool {
        self == Strategy::LeaderStall
    }
    pub(crate) fn flips_votes(self) -> bool {
        matches!(self, Strategy::CommitteeFalseVote | Strategy::Combined)
    }
    pub(crate) fn bad_hashes(self) -> bool {
        matches!(self, Strategy::NodeBadHash | Strategy::Combined)
    }
    pub(crate) fn withholds_signatures(self) -> bool {
        matches!(self, Strategy::NodeWithholdSignature | Strategy::Combined)
    }
    pub(crate) fn spams_clients(self) -> bool {
        self == Strategy::Combined
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown adversary strategy `{s}`"))
    }
}

/// How the corrupted set is chosen before the first iteration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corruption {
    None,
    Explicit(BTreeSet<NodeId>),
    /// `count` uniformly random nodes, optionally forcing the first leader in.
    Random { count: usize, include_leader: bool },
    /// `count` nodes placing as many as possible on the first committee
    /// without giving it a corrupted majority.
    CommitteeMinority { count: usize, include_leader: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub strategy: Strategy,
    pub corruption: Corruption,
    pub pre_gst: PreGstPolicy,
    /// Abort with a harness violation if any committee gets a corrupted majority.
    pub require_honest_committee: bool,
}

impl AdversarySpec {
    pub fn honest() -> Self {
        AdversarySpec {
            strategy: Strategy::Honest,
            corruption: Corruption::None,
            pre_gst: PreGstPolicy::Synchronous,
            require_honest_committee: false,
        }
    }

    pub fn new(strategy: Strategy, corruption: Corruption) -> Self {
        AdversarySpec {
            strategy,
            corruption,
            ..Self::honest()
        }
    }

    /// Fixes the corrupted set given the first iteration's leader and committee.
    pub fn resolve<R: Rng + ?Sized>(
        &self,
        n: usize,
        f: usize,
        leader: NodeId,
        roster: &CommitteeRoster,
        rng: &mut R,
    ) -> Result<BTreeSet<NodeId>, SimError> {
        let set: BTreeSet<NodeId> = match &self.corruption {
            Corruption::None => BTreeSet::new(),
            Corruption::Explicit(s) => {
                if let Some(bad) = s.iter().find(|id| id.0 == 0 || id.index() >= n) {
                    return Err(SimError::HarnessViolation(format!("{bad} is not a node")));
                }
                s.clone()
            }
            &Corruption::Random { count, include_leader } => {
                check_budget(count, f)?;
                let mut set = BTreeSet::new();
                if include_leader && count > 0 {
                    set.insert(leader);
                }
                let mut rest: Vec<NodeId> = NodeId::all(n).filter(|x| !set.contains(x)).collect();
                rest.shuffle(rng);
                set.extend(rest.into_iter().take(count - set.len()));
                set
            }
            &Corruption::CommitteeMinority { count, include_leader } => {
                check_budget(count, f)?;
                let budget = (roster.len() - 1) / 2;
                let mut set = BTreeSet::new();
                let mut seats = 0;
                if include_leader && count > 0 {
                    set.insert(leader);
                    seats += roster.contains(leader) as usize;
                }
                let mut members: Vec<NodeId> = roster.members.iter().copied().filter(|m| !set.contains(m)).collect();
                members.shuffle(rng);
                for m in members {
                    if set.len() == count || seats == budget {
                        break;
                    }
                    set.insert(m);
                    seats += 1;
                }
                let mut outside: Vec<NodeId> = NodeId::all(n)
                    .filter(|x| !roster.contains(*x) && !set.contains(x))
                    .collect();
                outside.shuffle(rng);
                let missing = count - set.len();
                set.extend(outside.into_iter().take(missing));
                set
            }
        };
        check_budget(set.len(), f)?;
        Ok(set)
    }
}

fn check_budget(count: usize, f: usize) -> Result<(), SimError> {
    if count > f {
        return Err(SimError::HarnessViolation(format!("{count} corrupted nodes exceed f = {f}")));
    }
    Ok(())
}
