use std::collections::{BTreeMap, BTreeSet};

use crate::blockdata::TX_BYTES;
use crate::crypto::{ver, KeyRegistry};
use crate::ids::{ClientId, NodeId};

use super::{certified_message, ProofBundle};

/// Both Step 8 checks: the inclusion proof opens `C` at the bundle's index,
/// and `sigma_final` certifies `C || blockNum`.
pub fn verify_bundle(reg: &KeyRegistry, b: &ProofBundle) -> bool {
    ver(&b.commitment, &b.tx.to_bytes(), b.index as usize, &b.proof)
        && reg.threshold_verify(&certified_message(&b.commitment, b.block_num), &b.sig)
}

/// A client's inbox. Only bundles about the client's own transactions are
/// looked at, and only the first one from each node per transaction.
#[derive(Clone, Debug)]
pub struct ClientVerifier {
    client: ClientId,
    considered: BTreeSet<(NodeId, [u8; TX_BYTES])>,
    confirmed: BTreeMap<(u64, [u8; TX_BYTES]), ProofBundle>,
    attempts: u64,
    discarded: u64,
    ignored: u64,
}

impl ClientVerifier {
    pub fn new(client: ClientId) -> Self {
        ClientVerifier {
            client,
            considered: BTreeSet::new(),
            confirmed: BTreeMap::new(),
            attempts: 0,
            discarded: 0,
            ignored: 0,
        }
    }

    pub fn client(&self) -> ClientId {
        self.client
    }

    /// `None` if the bundle was not considered; otherwise whether it verified.
    /// Once a transaction is confirmed, further bundles for it are not checked.
    pub fn receive(&mut self, reg: &KeyRegistry, from: NodeId, bundle: &ProofBundle) -> Option<bool> {
        let tx = bundle.tx.to_bytes();
        if !bundle.tx.involves(self.client)
            || self.confirmed.contains_key(&(bundle.block_num, tx))
            || !self.considered.insert((from, tx))
        {
            self.ignored += 1;
            return None;
        }
        self.attempts += 1;
        let ok = verify_bundle(reg, bundle);
        if ok {
            self.confirmed
                .entry((bundle.block_num, tx))
                .or_insert_with(|| bundle.clone());
        } else {
            self.discarded += 1;
        }
        Some(ok)
    }

    pub fn is_confirmed(&self, block_num: u64, tx: &[u8; TX_BYTES]) -> bool {
        self.confirmed.contains_key(&(block_num, *tx))
    }

    pub fn confirmation(&self, block_num: u64, tx: &[u8; TX_BYTES]) -> Option<&ProofBundle> {
        self.confirmed.get(&(block_num, *tx))
    }

    pub fn confirmed_count(&self) -> usize {
        self.confirmed.len()
    }

    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    pub fn discarded(&self) -> u64 {
        self.discarded
    }

    pub fn ignored(&self) -> u64 {
        self.ignored
    }
}
