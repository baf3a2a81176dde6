//! Vector commitments as a binary SHA-256 tree.
//!
//! Leaves are padded to the next power of two, so every proof for a vector of
//! length `g` carries exactly `ceil(log2 g)` sibling digests. The committed
//! length is folded into the root, which binds proofs to both position and
//! vector length.

use serde::{Deserialize, Serialize};

use super::{sha256, CryptoError, Digest, DIGEST_LEN};

const LEAF: &[u8] = &[0x00];
const INNER: &[u8] = &[0x01];
const PAD: &[u8] = &[0x02];
const ROOT: &[u8] = &[0x03];

/// `C = COM(v)`: the root digest and committed length `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Commitment {
    pub root: Digest,
    pub len: u32,
}

impl Commitment {
    pub const ENCODED_LEN: usize = DIGEST_LEN + 4;

    /// root || len (u32 BE)
    pub fn to_bytes(&self) -> [u8; Self::ENCODED_LEN] {
        let mut out = [0u8; Self::ENCODED_LEN];
        out[..DIGEST_LEN].copy_from_slice(&self.root);
        out[DIGEST_LEN..].copy_from_slice(&self.len.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(CryptoError::Malformed(format!("commitment length {}", bytes.len())));
        }
        Ok(Commitment {
            root: bytes[..DIGEST_LEN].try_into().unwrap(),
            len: u32::from_be_bytes(bytes[DIGEST_LEN..].try_into().unwrap()),
        })
    }
}

/// `pi_i`: a 1-based index and the sibling digests from leaf to root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InclusionProof {
    pub index: u32,
    pub path: Vec<Digest>,
}

impl InclusionProof {
    pub fn encoded_len(&self) -> usize {
        Self::encoded_len_for(self.path.len())
    }

    pub fn encoded_len_for(path_len: usize) -> usize {
        4 + 1 + DIGEST_LEN * path_len
    }

    /// index (u32 BE) || path length (u8) || digests
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.index.to_be_bytes());
        out.push(self.path.len() as u8);
        for d in &self.path {
            out.extend_from_slice(d);
        }
        out
    }

    /// Parses the prefix of `bytes`, returning the proof and bytes consumed.
    pub fn from_bytes_prefix(bytes: &[u8]) -> Result<(Self, usize), CryptoError> {
        if bytes.len() < 5 {
            return Err(CryptoError::Malformed("proof truncated".into()));
        }
        let index = u32::from_be_bytes(bytes[..4].try_into().unwrap());
        let len = bytes[4] as usize;
        let total = Self::encoded_len_for(len);
        if bytes.len() < total {
            return Err(CryptoError::Malformed("proof truncated".into()));
        }
        let path = bytes[5..total]
            .chunks_exact(DIGEST_LEN)
            .map(|c| c.try_into().unwrap())
            .collect();
        Ok((InclusionProof { index, path }, total))
    }
}

/// Tree depth for `g` leaves: `ceil(log2 g)`.
pub fn tree_depth(g: usize) -> usize {
    if g <= 1 {
        0
    } else {
        (usize::BITS - (g - 1).leading_zeros()) as usize
    }
}

fn leaf_hash(message: &[u8]) -> Digest {
    sha256(&[LEAF, message])
}

fn inner_hash(left: &Digest, right: &Digest) -> Digest {
    sha256(&[INNER, left, right])
}

fn root_hash(len: u32, top: &Digest) -> Digest {
    sha256(&[ROOT, &len.to_be_bytes(), top])
}

/// A built tree; cheap to query for every index.
#[derive(Clone, Debug)]
pub struct CommitmentTree {
    levels: Vec<Vec<Digest>>,
    len: usize,
    commitment: Commitment,
}

impl CommitmentTree {
    pub fn build<M: AsRef<[u8]>>(messages: &[M]) -> Result<Self, CryptoError> {
        if messages.is_empty() {
            return Err(CryptoError::EmptyInput);
        }
        let len = messages.len();
        let width = 1usize << tree_depth(len);
        let pad = sha256(&[PAD]);
        let mut level: Vec<Digest> = messages.iter().map(|m| leaf_hash(m.as_ref())).collect();
        level.resize(width, pad);
        let mut levels = vec![level];
        while levels.last().unwrap().len() > 1 {
            let next = levels
                .last()
                .unwrap()
                .chunks_exact(2)
                .map(|pair| inner_hash(&pair[0], &pair[1]))
                .collect();
            levels.push(next);
        }
        let commitment = Commitment {
            root: root_hash(len as u32, &levels.last().unwrap()[0]),
            len: len as u32,
        };
        Ok(CommitmentTree {
            levels,
            len,
            commitment,
        })
    }

    pub fn commitment(&self) -> Commitment {
        self.commitment
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Proof for the 1-based `index`.
    pub fn prove(&self, index: usize) -> Result<InclusionProof, CryptoError> {
        if index == 0 || index > self.len {
            return Err(CryptoError::IndexOutOfRange {
                index,
                len: self.len,
            });
        }
        let mut pos = index - 1;
        let path = self.levels[..self.levels.len() - 1]
            .iter()
            .map(|level| {
                let sib = level[pos ^ 1];
                pos >>= 1;
                sib
            })
            .collect();
        Ok(InclusionProof {
            index: index as u32,
            path,
        })
    }

    pub fn prove_all(&self) -> Vec<InclusionProof> {
        (1..=self.len).map(|i| self.prove(i).unwrap()).collect()
    }
}

/// `COM(v)`.
pub fn com<M: AsRef<[u8]>>(messages: &[M]) -> Result<Commitment, CryptoError> {
    CommitmentTree::build(messages).map(|t| t.commitment())
}

/// `PROVE` for the 1-based `index`. Builds the whole tree; use
/// [`CommitmentTree`] when proving many indices.
pub fn prove<M: AsRef<[u8]>>(messages: &[M], index: usize) -> Result<InclusionProof, CryptoError> {
    if index == 0 || index > messages.len() {
        return Err(CryptoError::IndexOutOfRange {
            index,
            len: messages.len(),
        });
    }
    CommitmentTree::build(messages)?.prove(index)
}

/// `VER(C, m, i, pi)`.
pub fn ver(commitment: &Commitment, message: &[u8], index: usize, proof: &InclusionProof) -> bool {
    let len = commitment.len as usize;
    if index == 0 || index > len || proof.index as usize != index {
        return false;
    }
    if proof.path.len() != tree_depth(len) {
        return false;
    }
    let mut pos = index - 1;
    let mut node = leaf_hash(message);
    for sib in &proof.path {
        node = if pos & 1 == 0 {
            inner_hash(&node, sib)
        } else {
            inner_hash(sib, &node)
        };
        pos >>= 1;
    }
    root_hash(commitment.len, &node) == commitment.root
}
