use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::crypto::{sha256, Digest};
use crate::field_codec::{Fe, MERSENNE61};
use crate::ids::NodeId;

/// Shared public randomness: output `i` is `SHA-256(seed || i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Beacon {
    seed: u64,
    counter: u64,
}

impl Beacon {
    pub fn new(seed: u64) -> Self {
        Beacon { seed, counter: 0 }
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn next(&mut self) -> Digest {
        let out = sha256(&[b"coded-confirm/beacon", &self.seed.to_be_bytes(), &self.counter.to_be_bytes()]);
        self.counter += 1;
        out
    }

    fn rng(&mut self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.next())
    }

    /// Nonzero hash parameter.
    pub fn next_alpha(&mut self) -> Fe {
        Fe::new(self.rng().gen_range(1..MERSENNE61))
    }
}

/// Uniform leader among `1..=n`. Re-election simply draws again.
pub fn elect_leader(beacon: &mut Beacon, n: usize) -> NodeId {
    NodeId(beacon.rng().gen_range(1..=n as u32))
}
