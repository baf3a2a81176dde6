//! Transactions, blocks, and their field-element form.
//!
//! A transaction has a fixed 64-byte canonical layout (sender, receiver,
//! amount, nonce as u64 BE, then the 32-byte payload digest). That layout is
//! what the vector commitment covers. For coding, the same bytes are split
//! into sixteen 32-bit big-endian limbs, one per field element, which keeps
//! the map injective for any field larger than 2^32 and gives every field its
//! own slots.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field_codec::{encode_parts, CodecError, EvalDomain, Fe, MERSENNE61};
use crate::ids::{ClientId, NodeId};

/// Canonical byte length of a transaction.
pub const TX_BYTES: usize = 64;
/// Field elements per serialized transaction.
pub const TX_WIDTH: usize = 16;

const LIMB_BYTES: usize = TX_BYTES / TX_WIDTH;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("malformed transaction: {0}")]
    MalformedTransaction(String),
    #[error("block has no transactions")]
    EmptyBlock,
    #[error("part count must be at least 1")]
    InvalidPartCount,
    #[error("transaction {0} uses reserved client id 0 as sender")]
    ReservedSender(usize),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transaction {
    pub sender: ClientId,
    pub receiver: ClientId,
    pub amount: u64,
    pub nonce: u64,
    pub payload_digest: [u8; 32],
}

impl Transaction {
    pub fn to_bytes(&self) -> [u8; TX_BYTES] {
        let mut out = [0u8; TX_BYTES];
        out[0..8].copy_from_slice(&self.sender.0.to_be_bytes());
        out[8..16].copy_from_slice(&self.receiver.0.to_be_bytes());
        out[16..24].copy_from_slice(&self.amount.to_be_bytes());
        out[24..32].copy_from_slice(&self.nonce.to_be_bytes());
        out[32..64].copy_from_slice(&self.payload_digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BlockError> {
        if bytes.len() != TX_BYTES {
            return Err(BlockError::MalformedTransaction(format!(
                "expected {TX_BYTES} bytes, got {}",
                bytes.len()
            )));
        }
        let word = |i: usize| u64::from_be_bytes(bytes[i..i + 8].try_into().unwrap());
        Ok(Transaction {
            sender: ClientId(word(0)),
            receiver: ClientId(word(8)),
            amount: word(16),
            nonce: word(24),
            payload_digest: bytes[32..64].try_into().unwrap(),
        })
    }

    pub fn involves(&self, client: ClientId) -> bool {
        self.sender == client || self.receiver == client
    }
}

pub fn serialize_tx(tx: &Transaction) -> [Fe; TX_WIDTH] {
    let bytes = tx.to_bytes();
    let mut out = [Fe::ZERO; TX_WIDTH];
    for (o, limb) in out.iter_mut().zip(bytes.chunks_exact(LIMB_BYTES)) {
        *o = Fe::new(u32::from_be_bytes(limb.try_into().unwrap()) as u64);
    }
    out
}

pub fn deserialize_tx(elements: &[Fe]) -> Result<Transaction, BlockError> {
    if elements.len() != TX_WIDTH {
        return Err(BlockError::MalformedTransaction(format!(
            "expected {TX_WIDTH} elements, got {}",
            elements.len()
        )));
    }
    let mut bytes = [0u8; TX_BYTES];
    for (chunk, e) in bytes.chunks_exact_mut(LIMB_BYTES).zip(elements) {
        let limb = u32::try_from(e.value()).map_err(|_| {
            BlockError::MalformedTransaction(format!("limb {} exceeds 32 bits", e.value()))
        })?;
        chunk.copy_from_slice(&limb.to_be_bytes());
    }
    let tx = Transaction::from_bytes(&bytes)?;
    if tx.sender.0 == 0 {
        return Err(BlockError::MalformedTransaction("sender id 0 is reserved".into()));
    }
    Ok(tx)
}

/// An ordered block `x_1..x_g`; transaction `i` sits at confirmation index `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub block_num: u64,
    pub transactions: Vec<Transaction>,
}

impl Block {
    pub fn new(block_num: u64, transactions: Vec<Transaction>) -> Self {
        Block {
            block_num,
            transactions,
        }
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// 1-based access.
    pub fn tx(&self, index: usize) -> Option<&Transaction> {
        index.checked_sub(1).and_then(|i| self.transactions.get(i))
    }

    /// The messages the vector commitment is computed over.
    pub fn messages(&self) -> Vec<[u8; TX_BYTES]> {
        self.transactions.iter().map(Transaction::to_bytes).collect()
    }

    pub fn size_bits(&self) -> u64 {
        (self.len() * TX_BYTES * 8) as u64
    }

    /// `g` random transactions between clients `1..=num_clients`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, block_num: u64, g: usize, num_clients: u64) -> Self {
        let transactions = (0..g)
            .map(|i| {
                let sender = rng.gen_range(1..=num_clients);
                let receiver = rng.gen_range(1..=num_clients);
                Transaction {
                    sender: ClientId(sender),
                    receiver: ClientId(receiver),
                    amount: rng.gen_range(1..1_000_000),
                    nonce: i as u64,
                    payload_digest: rng.gen(),
                }
            })
            .collect();
        Block::new(block_num, transactions)
    }
}

/// `P_k`: the serialized transactions of chunk `k`, zero padded to the common length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPart {
    pub index: usize,
    pub data: Vec<Fe>,
}

/// `P~_i`: the coded share delivered to node `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedPart {
    pub node: NodeId,
    pub data: Vec<Fe>,
}

/// Transactions per part, `ceil(g / K)`.
pub fn chunk_len(g: usize, k: usize) -> usize {
    g.div_ceil(k)
}

/// Splits the block into `k` contiguous chunks of `ceil(g/k)` transactions.
pub fn partition_block(block: &Block, k: usize) -> Result<Vec<BlockPart>, BlockError> {
    if k == 0 {
        return Err(BlockError::InvalidPartCount);
    }
    if block.is_empty() {
        return Err(BlockError::EmptyBlock);
    }
    if let Some(pos) = block.transactions.iter().position(|tx| tx.sender.0 == 0) {
        return Err(BlockError::ReservedSender(pos + 1));
    }
    let per_part = chunk_len(block.len(), k);
    let m = per_part * TX_WIDTH;
    Ok((0..k)
        .map(|p| {
            let start = (p * per_part).min(block.len());
            let end = ((p + 1) * per_part).min(block.len());
            let mut data: Vec<Fe> = block.transactions[start..end]
                .iter()
                .flat_map(serialize_tx)
                .collect();
            data.resize(m, Fe::ZERO);
            BlockPart { index: p + 1, data }
        })
        .collect())
}

/// Inverse of [`partition_block`]; all-zero transaction slots are padding.
pub fn reassemble_block(block_num: u64, parts: &[BlockPart]) -> Result<Block, BlockError> {
    let mut transactions = Vec::new();
    for part in parts {
        if part.data.len() % TX_WIDTH != 0 {
            return Err(BlockError::MalformedTransaction(format!(
                "part {} length {} is not a multiple of {TX_WIDTH}",
                part.index,
                part.data.len()
            )));
        }
        for slot in part.data.chunks_exact(TX_WIDTH) {
            if slot.iter().all(|e| e.is_zero()) {
                continue;
            }
            transactions.push(deserialize_tx(slot)?);
        }
    }
    Ok(Block::new(block_num, transactions))
}

/// Lagrange-encodes the parts into one coded part per node.
pub fn encode_block_parts(
    parts: &[BlockPart],
    domain: &EvalDomain<MERSENNE61>,
) -> Result<Vec<CodedPart>, BlockError> {
    let data: Vec<&[Fe]> = parts.iter().map(|p| p.data.as_slice()).collect();
    Ok(encode_parts(&data, domain)?
        .into_iter()
        .enumerate()
        .map(|(i, data)| CodedPart {
            node: NodeId::from_index(i),
            data,
        })
        .collect())
}
