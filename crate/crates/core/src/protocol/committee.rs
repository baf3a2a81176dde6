use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::crypto::Digest;
use crate::ids::NodeId;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommitteeRoster {
    pub members: Vec<NodeId>,
    pub seed: Digest,
}

impl CommitteeRoster {
    pub fn contains(&self, id: NodeId) -> bool {
        self.members.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `lambda` distinct nodes drawn uniformly without replacement.
pub fn select_committee(seed: Digest, n: usize, lambda: usize) -> Result<CommitteeRoster, ProtocolError> {
    if lambda > n {
        return Err(ProtocolError::InvalidConfig(format!("committee of {lambda} from {n} nodes")));
    }
    let mut rng = ChaCha20Rng::from_seed(seed);
    let members = sample(&mut rng, n, lambda)
        .into_iter()
        .map(NodeId::from_index)
        .collect();
    Ok(CommitteeRoster { members, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::sha256;
    use std::collections::BTreeSet;

    fn seed(i: u64) -> Digest {
        sha256(&[&i.to_be_bytes()])
    }

    #[test]
    fn full_committee_is_a_permutation() {
        let r = select_committee(seed(1), 9, 9).unwrap();
        let set: BTreeSet<_> = r.members.iter().copied().collect();
        assert_eq!(set, NodeId::all(9).collect());
    }

    #[test]
    fn deterministic_distinct_and_bounded() {
        let a = select_committee(seed(7), 10, 5).unwrap();
        assert_eq!(a, select_committee(seed(7), 10, 5).unwrap());
        assert_eq!(a.members.iter().collect::<BTreeSet<_>>().len(), 5);
        assert!(select_committee(seed(7), 4, 5).is_err());
    }

    #[test]
    fn membership_frequency_matches_lambda_over_n() {
        let draws = 100_000u64;
        let mut counts = [0u64; 10];
        for i in 0..draws {
            for m in select_committee(seed(i), 10, 3).unwrap().members {
                counts[m.index()] += 1;
            }
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.3).abs() <= 0.01, "{freq}");
        }
    }
}
