//! Simulation-grade cryptographic primitives.
//!
//! Signatures are keyed SHA-256 tags checked against a registry that holds
//! every key. That is enough for a trusted simulator: a tag can only be
//! produced by code that reads the signer's secret from the registry, and
//! verification recomputes it.

mod commitment;
mod hash;
mod signature;
mod threshold;

use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::ids::NodeId;

pub use commitment::{com, prove, tree_depth, ver, Commitment, CommitmentTree, InclusionProof};
pub use hash::{poly_hash, HashParams, D_HASH};
pub use signature::{KeyRegistry, Signature};
pub use threshold::{CombinedSignature, PartialSignature};

pub const DIGEST_LEN: usize = 32;

pub type Digest = [u8; DIGEST_LEN];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("unknown signer {0}")]
    UnknownSigner(NodeId),
    #[error("need {need} distinct valid partial signatures, have {have}")]
    InsufficientShares { have: usize, need: usize },
    #[error("partial signatures over different messages")]
    MessageMismatch,
    #[error("empty input")]
    EmptyInput,
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("hash parameter alpha must be nonzero")]
    ZeroAlpha,
    #[error("malformed encoding: {0}")]
    Malformed(String),
}

/// SHA-256 over the concatenation of `parts`.
pub fn sha256(parts: &[&[u8]]) -> Digest {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().into()
}
