//! `t = N/2` threshold signatures, realized as a deduplicated multi-signature:
//! the combined form is an `N`-bit signer bitmap plus one folded tag.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{sha256, CryptoError, Digest, KeyRegistry};
use crate::ids::NodeId;

const PARTIAL_DOMAIN: &[u8] = b"coded-confirm/tsig";
const COMBINE_DOMAIN: &[u8] = b"coded-confirm/tcomb";

/// `sigma_{skt_i}(m)`, tagged with the digest of the message it covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialSignature {
    pub signer: NodeId,
    pub message_digest: Digest,
    pub tag: Digest,
}

impl PartialSignature {
    pub const ENCODED_LEN: usize = 4 + 32 + 32;
}

/// `sigma_comb(m, S)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CombinedSignature {
    width: u16,
    bitmap: Vec<u8>,
    tag: Digest,
}

impl CombinedSignature {
    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn signers(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.width as usize)
            .filter(|&i| self.bitmap[i / 8] >> (i % 8) & 1 == 1)
            .map(NodeId::from_index)
    }

    pub fn signer_count(&self) -> usize {
        self.bitmap.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn encoded_len_for(n: usize) -> usize {
        2 + n.div_ceil(8) + 32
    }

    pub fn encoded_len(&self) -> usize {
        Self::encoded_len_for(self.width())
    }

    /// Width (u16 BE) || bitmap (ceil(N/8) bytes, bit i-1 for node i) || tag.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.width.to_be_bytes());
        out.extend_from_slice(&self.bitmap);
        out.extend_from_slice(&self.tag);
        out
    }

    /// Parses the prefix of `bytes`, returning the signature and bytes consumed.
    pub fn from_bytes_prefix(bytes: &[u8]) -> Result<(Self, usize), CryptoError> {
        if bytes.len() < 2 {
            return Err(CryptoError::Malformed("combined signature truncated".into()));
        }
        let width = u16::from_be_bytes([bytes[0], bytes[1]]);
        let len = Self::encoded_len_for(width as usize);
        if bytes.len() < len {
            return Err(CryptoError::Malformed("combined signature truncated".into()));
        }
        let map_len = (width as usize).div_ceil(8);
        let sig = CombinedSignature {
            width,
            bitmap: bytes[2..2 + map_len].to_vec(),
            tag: bytes[2 + map_len..len].try_into().unwrap(),
        };
        Ok((sig, len))
    }
}

impl KeyRegistry {
    fn partial_tag(&self, slot: usize, message: &[u8]) -> Digest {
        sha256(&[PARTIAL_DOMAIN, &self.threshold_shares[slot], message])
    }

    fn fold(&self, message: &[u8], tags: &[Digest]) -> Digest {
        let mut parts: Vec<&[u8]> = vec![COMBINE_DOMAIN, &self.threshold_public, message];
        parts.extend(tags.iter().map(|t| t.as_slice()));
        sha256(&parts)
    }

    pub fn threshold_sign(&self, signer: NodeId, message: &[u8]) -> Result<PartialSignature, CryptoError> {
        let slot = self.slot(signer).ok_or(CryptoError::UnknownSigner(signer))?;
        Ok(PartialSignature {
            signer,
            message_digest: sha256(&[message]),
            tag: self.partial_tag(slot, message),
        })
    }

    pub fn verify_partial(&self, message: &[u8], partial: &PartialSignature) -> bool {
        match self.slot(partial.signer) {
            Some(slot) => {
                partial.message_digest == sha256(&[message])
                    && partial.tag == self.partial_tag(slot, message)
            }
            None => false,
        }
    }

    /// Combines partials over `message`. Invalid partials are ignored and
    /// duplicates from one signer count once; at least `t + 1` distinct valid
    /// signers are required.
    pub fn combine(&self, message: &[u8], partials: &[PartialSignature]) -> Result<CombinedSignature, CryptoError> {
        let digest = sha256(&[message]);
        if partials.iter().any(|p| p.message_digest != digest) {
            return Err(CryptoError::MessageMismatch);
        }
        let valid: BTreeMap<NodeId, Digest> = partials
            .iter()
            .filter(|p| self.verify_partial(message, p))
            .map(|p| (p.signer, p.tag))
            .collect();
        let need = self.threshold() + 1;
        if valid.len() < need {
            return Err(CryptoError::InsufficientShares {
                have: valid.len(),
                need,
            });
        }
        let n = self.n();
        let mut bitmap = vec![0u8; n.div_ceil(8)];
        for id in valid.keys() {
            bitmap[id.index() / 8] |= 1 << (id.index() % 8);
        }
        let tags: Vec<Digest> = valid.into_values().collect();
        Ok(CombinedSignature {
            width: n as u16,
            bitmap,
            tag: self.fold(message, &tags),
        })
    }

    /// `V_t(m, sigma, pkt)`.
    pub fn threshold_verify(&self, message: &[u8], sig: &CombinedSignature) -> bool {
        let n = self.n();
        if sig.width() != n || sig.bitmap.len() != n.div_ceil(8) {
            return false;
        }
        // stray bits past the last node
        if n % 8 != 0 && sig.bitmap[n / 8] >> (n % 8) != 0 {
            return false;
        }
        if sig.signer_count() < self.threshold() + 1 {
            return false;
        }
        let tags: Vec<Digest> = sig
            .signers()
            .map(|id| self.partial_tag(id.index(), message))
            .collect();
        self.fold(message, &tags) == sig.tag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partials(reg: &KeyRegistry, m: &[u8], ids: impl IntoIterator<Item = u32>) -> Vec<PartialSignature> {
        ids.into_iter()
            .map(|i| reg.threshold_sign(NodeId(i), m).unwrap())
            .collect()
    }

    #[test]
    fn threshold_boundary_n10() {
        let reg = KeyRegistry::generate(10, 3);
        let m = b"C||blockNum";
        let six = reg.combine(m, &partials(&reg, m, 1..=6)).unwrap();
        assert!(reg.threshold_verify(m, &six));
        assert!(!reg.threshold_verify(b"other", &six));
        assert_eq!(
            reg.combine(m, &partials(&reg, m, 1..=5)),
            Err(CryptoError::InsufficientShares { have: 5, need: 6 })
        );
    }

    #[test]
    fn duplicates_count_once() {
        let reg = KeyRegistry::generate(10, 3);
        let m = b"msg";
        let p = reg.threshold_sign(NodeId(1), m).unwrap();
        assert_eq!(
            reg.combine(m, &[p; 6]),
            Err(CryptoError::InsufficientShares { have: 1, need: 6 })
        );
    }

    #[test]
    fn mixed_messages_rejected() {
        let reg = KeyRegistry::generate(4, 3);
        let mut ps = partials(&reg, b"a", 1..=2);
        ps.extend(partials(&reg, b"b", 3..=3));
        assert_eq!(reg.combine(b"a", &ps), Err(CryptoError::MessageMismatch));
    }

    #[test]
    fn invalid_partials_are_ignored() {
        let reg = KeyRegistry::generate(4, 3);
        let m = b"m";
        let mut ps = partials(&reg, m, 1..=2);
        let mut bad = reg.threshold_sign(NodeId(3), m).unwrap();
        bad.tag[0] ^= 1;
        ps.push(bad);
        assert!(matches!(reg.combine(m, &ps), Err(CryptoError::InsufficientShares { have: 2, .. })));
        ps.push(reg.threshold_sign(NodeId(4), m).unwrap());
        let sig = reg.combine(m, &ps).unwrap();
        assert_eq!(sig.signers().collect::<Vec<_>>(), vec![NodeId(1), NodeId(2), NodeId(4)]);
        assert!(reg.threshold_verify(m, &sig));
    }

    #[test]
    fn adding_partials_keeps_verifying() {
        let reg = KeyRegistry::generate(9, 1);
        let m = b"m";
        for extra in 5..=9 {
            let sig = reg.combine(m, &partials(&reg, m, 1..=extra)).unwrap();
            assert!(reg.threshold_verify(m, &sig));
        }
    }

    #[test]
    fn tampered_combined_rejected() {
        let reg = KeyRegistry::generate(10, 3);
        let m = b"m";
        let sig = reg.combine(m, &partials(&reg, m, 1..=6)).unwrap();
        let bytes = sig.to_bytes();
        assert_eq!(bytes.len(), CombinedSignature::encoded_len_for(10));
        let (parsed, used) = CombinedSignature::from_bytes_prefix(&bytes).unwrap();
        assert_eq!((parsed.clone(), used), (sig.clone(), bytes.len()));
        for i in 0..bytes.len() {
            let mut b = bytes.clone();
            b[i] ^= 0x04;
            let ok = CombinedSignature::from_bytes_prefix(&b)
                .map(|(s, _)| reg.threshold_verify(m, &s))
                .unwrap_or(false);
            assert!(!ok, "flip at byte {i} still verifies");
        }
    }
}
