use serde::{Deserialize, Serialize};

use super::{sha256, CryptoError, Digest};
use crate::ids::NodeId;

const SIG_DOMAIN: &[u8] = b"coded-confirm/sig";

/// Per-node signing keys and threshold key shares for `N` nodes.
///
/// Immutable after [`KeyRegistry::generate`]; share it behind an `Arc`.
#[derive(Clone)]
pub struct KeyRegistry {
    signing: Vec<Digest>,
    public: Vec<Digest>,
    pub(super) threshold_shares: Vec<Digest>,
    pub(super) threshold_public: Digest,
    threshold: usize,
}

impl std::fmt::Debug for KeyRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyRegistry")
            .field("n", &self.n())
            .field("t", &self.threshold)
            .finish_non_exhaustive()
    }
}

/// A signature `sigma_{sk_i}(m)`: the signer and a 32-byte tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub signer: NodeId,
    pub tag: Digest,
}

impl Signature {
    pub const ENCODED_LEN: usize = 4 + 32;

    pub fn to_bytes(&self) -> [u8; Self::ENCODED_LEN] {
        let mut out = [0u8; Self::ENCODED_LEN];
        out[..4].copy_from_slice(&self.signer.0.to_be_bytes());
        out[4..].copy_from_slice(&self.tag);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(CryptoError::Malformed(format!("signature length {}", bytes.len())));
        }
        let signer = NodeId(u32::from_be_bytes(bytes[..4].try_into().unwrap()));
        Ok(Signature {
            signer,
            tag: bytes[4..].try_into().unwrap(),
        })
    }
}

impl KeyRegistry {
    /// Derives all keys for nodes `1..=n` from `seed`. The threshold is `t = n / 2`.
    pub fn generate(n: usize, seed: u64) -> Self {
        let seed = seed.to_be_bytes();
        let derive = |label: &[u8], i: u32| sha256(&[b"coded-confirm/keygen", label, &seed, &i.to_be_bytes()]);
        let signing: Vec<Digest> = (1..=n as u32).map(|i| derive(b"sk", i)).collect();
        let public = signing.iter().map(|sk| sha256(&[b"pk", sk])).collect();
        let threshold_shares: Vec<Digest> = (1..=n as u32).map(|i| derive(b"skt", i)).collect();
        let mut parts: Vec<&[u8]> = vec![b"pkt"];
        parts.extend(threshold_shares.iter().map(|s| s.as_slice()));
        let threshold_public = sha256(&parts);
        KeyRegistry {
            signing,
            public,
            threshold_shares,
            threshold_public,
            threshold: n / 2,
        }
    }

    pub fn n(&self) -> usize {
        self.signing.len()
    }

    /// `t`; combining needs `t + 1` distinct partials.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn public_key(&self, node: NodeId) -> Option<&Digest> {
        self.public.get(self.slot(node)?)
    }

    pub fn threshold_public_key(&self) -> &Digest {
        &self.threshold_public
    }

    pub(super) fn slot(&self, node: NodeId) -> Option<usize> {
        (node.0 >= 1 && node.index() < self.n()).then(|| node.index())
    }

    pub fn sign(&self, signer: NodeId, message: &[u8]) -> Result<Signature, CryptoError> {
        let slot = self.slot(signer).ok_or(CryptoError::UnknownSigner(signer))?;
        Ok(Signature {
            signer,
            tag: sha256(&[SIG_DOMAIN, &self.signing[slot], message]),
        })
    }

    /// `V(m, sigma, pk_signer)`.
    pub fn verify(&self, message: &[u8], sig: &Signature, signer: NodeId) -> bool {
        if sig.signer != signer {
            return false;
        }
        match self.slot(signer) {
            Some(slot) => sha256(&[SIG_DOMAIN, &self.signing[slot], message]) == sig.tag,
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_and_verify() {
        let reg = KeyRegistry::generate(10, 1);
        let m = b"commitment".to_vec();
        let sig = reg.sign(NodeId(3), &m).unwrap();
        assert!(reg.verify(&m, &sig, NodeId(3)));
        let mut altered = m.clone();
        altered.push(b'x');
        assert!(!reg.verify(&altered, &sig, NodeId(3)));
        assert!(!reg.verify(&m, &sig, NodeId(4)));
        let forged = Signature { signer: NodeId(4), ..sig };
        assert!(!reg.verify(&m, &forged, NodeId(4)));
    }

    #[test]
    fn unknown_signer() {
        let reg = KeyRegistry::generate(4, 1);
        assert_eq!(reg.sign(NodeId(5), b"m"), Err(CryptoError::UnknownSigner(NodeId(5))));
        assert_eq!(reg.sign(NodeId(0), b"m"), Err(CryptoError::UnknownSigner(NodeId(0))));
        let sig = reg.sign(NodeId(1), b"m").unwrap();
        assert!(!reg.verify(b"m", &Signature { signer: NodeId(9), ..sig }, NodeId(9)));
    }

    #[test]
    fn keys_depend_on_seed() {
        let a = KeyRegistry::generate(4, 1);
        let b = KeyRegistry::generate(4, 2);
        let sig = a.sign(NodeId(1), b"m").unwrap();
        assert!(!b.verify(b"m", &sig, NodeId(1)));
        assert_ne!(a.threshold_public_key(), b.threshold_public_key());
        assert_eq!(a.threshold(), 2);
    }

    #[test]
    fn random_tags_do_not_verify() {
        use rand::{Rng, SeedableRng};
        let reg = KeyRegistry::generate(4, 7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let sig = Signature { signer: NodeId(2), tag: rng.gen() };
            assert!(!reg.verify(b"msg", &sig, NodeId(2)));
        }
    }

    #[test]
    fn signature_bytes_roundtrip() {
        let reg = KeyRegistry::generate(4, 7);
        let sig = reg.sign(NodeId(2), b"x").unwrap();
        assert_eq!(Signature::from_bytes(&sig.to_bytes()).unwrap(), sig);
        assert!(Signature::from_bytes(&[0u8; 5]).is_err());
    }
}
