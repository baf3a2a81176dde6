use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::blockdata::{Block, CodedPart, Transaction, TX_BYTES};
use crate::crypto::{
    Commitment, CombinedSignature, InclusionProof, KeyRegistry, PartialSignature, Signature, DIGEST_LEN,
};
use crate::field_codec::Fe;
use crate::ids::NodeId;

/// `C || blockNum`, the message certified by the threshold signature.
pub fn certified_message(c: &Commitment, block_num: u64) -> Vec<u8> {
    let mut m = c.to_bytes().to_vec();
    m.extend_from_slice(&block_num.to_be_bytes());
    m
}

/// `bit || C`. A member that never obtained `C` signs against all zeros.
pub fn vote_message(yes: bool, c: Option<&Commitment>) -> Vec<u8> {
    let mut m = vec![yes as u8];
    match c {
        Some(c) => m.extend_from_slice(&c.to_bytes()),
        None => m.extend_from_slice(&[0; Commitment::ENCODED_LEN]),
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vote {
    pub yes: bool,
    pub sig: Signature,
}

impl Vote {
    pub const ENCODED_LEN: usize = 1 + Signature::ENCODED_LEN;

    pub fn cast(reg: &KeyRegistry, member: NodeId, yes: bool, c: Option<&Commitment>) -> Self {
        let sig = reg
            .sign(member, &vote_message(yes, c))
            .expect("committee member is registered");
        Vote { yes, sig }
    }

    /// Valid iff signed by `member` over `bit || c`.
    pub fn verify(&self, reg: &KeyRegistry, member: NodeId, c: &Commitment) -> bool {
        self.sig.signer == member && reg.verify(&vote_message(self.yes, Some(c)), &self.sig, member)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.yes as u8];
        out.extend_from_slice(&self.sig.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProtocolError> {
        if bytes.len() != Self::ENCODED_LEN || bytes[0] > 1 {
            return Err(ProtocolError::Malformed("vote".into()));
        }
        let sig = Signature::from_bytes(&bytes[1..]).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
        Ok(Vote { yes: bytes[0] == 1, sig })
    }
}

/// The leader's Step 3 message: the uncoded block and its proofs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reveal {
    pub block: Block,
    pub proofs: Vec<InclusionProof>,
}

impl Reveal {
    pub fn encoded_len(&self) -> usize {
        8 + 4 + TX_BYTES * self.block.len() + 4 + self.proofs.iter().map(InclusionProof::encoded_len).sum::<usize>()
    }
}

/// What a client receives: `(C, pi_i, sigma_final)` plus the transaction and
/// its position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofBundle {
    pub block_num: u64,
    pub index: u32,
    pub tx: Transaction,
    pub commitment: Commitment,
    pub proof: InclusionProof,
    pub sig: CombinedSignature,
}

impl ProofBundle {
    pub fn encoded_len(&self) -> usize {
        8 + 4 + TX_BYTES + Commitment::ENCODED_LEN + self.proof.encoded_len() + self.sig.encoded_len()
    }

    /// block_num (u64 BE) || index (u32 BE) || tx || C || proof || sigma_final
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.block_num.to_be_bytes());
        out.extend_from_slice(&self.index.to_be_bytes());
        out.extend_from_slice(&self.tx.to_bytes());
        out.extend_from_slice(&self.commitment.to_bytes());
        out.extend_from_slice(&self.proof.to_bytes());
        out.extend_from_slice(&self.sig.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProtocolError> {
        let bad = |m: &str| ProtocolError::Malformed(format!("bundle: {m}"));
        let fixed = 8 + 4 + TX_BYTES + Commitment::ENCODED_LEN;
        if bytes.len() < fixed {
            return Err(bad("truncated"));
        }
        let block_num = u64::from_be_bytes(bytes[0..8].try_into().unwrap());
        let index = u32::from_be_bytes(bytes[8..12].try_into().unwrap());
        let tx = Transaction::from_bytes(&bytes[12..12 + TX_BYTES]).map_err(|e| bad(&e.to_string()))?;
        let c_at = 12 + TX_BYTES;
        let commitment = Commitment::from_bytes(&bytes[c_at..fixed]).map_err(|e| bad(&e.to_string()))?;
        let (proof, used) = InclusionProof::from_bytes_prefix(&bytes[fixed..]).map_err(|e| bad(&e.to_string()))?;
        let rest = &bytes[fixed + used..];
        let (sig, used) = CombinedSignature::from_bytes_prefix(rest).map_err(|e| bad(&e.to_string()))?;
        if used != rest.len() {
            return Err(bad("trailing bytes"));
        }
        Ok(ProofBundle {
            block_num,
            index,
            tx,
            commitment,
            proof,
            sig,
        })
    }
}

/// Point-to-point message bodies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    CodedPart(CodedPart),
    Reveal(Reveal),
    Hash(Fe),
    PartialSig(PartialSignature),
    Bundle(ProofBundle),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::CodedPart(_) => "coded_part",
            Payload::Reveal(_) => "reveal",
            Payload::Hash(_) => "hash",
            Payload::PartialSig(_) => "partial_sig",
            Payload::Bundle(_) => "bundle",
        }
    }

    /// Protocol step the message belongs to.
    pub fn step(&self) -> usize {
        match self {
            Payload::CodedPart(_) => 1,
            Payload::Reveal(_) => 3,
            Payload::Hash(_) => 4,
            Payload::PartialSig(_) => 6,
            Payload::Bundle(_) => 7,
        }
    }

    pub fn encoded_len(&self) -> usize {
        match self {
            Payload::CodedPart(p) => 4 + 4 + 8 * p.data.len(),
            Payload::Reveal(r) => r.encoded_len(),
            Payload::Hash(_) => 8,
            Payload::PartialSig(_) => PartialSignature::ENCODED_LEN,
            Payload::Bundle(b) => b.encoded_len(),
        }
    }

    /// Bytes that a constant-size commitment and threshold signature would
    /// not need: tree-proof digests and the signer bitmap.
    pub fn correction_len(&self) -> usize {
        match self {
            Payload::Reveal(r) => r.proofs.iter().map(|p| DIGEST_LEN * p.path.len()).sum(),
            Payload::Bundle(b) => DIGEST_LEN * b.proof.path.len() + b.sig.width().div_ceil(8),
            _ => 0,
        }
    }
}
