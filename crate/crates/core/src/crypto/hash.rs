use serde::{Deserialize, Serialize};

use super::CryptoError;
use crate::field_codec::Fp;

/// Degree of [`poly_hash`] as a polynomial in its input.
pub const D_HASH: usize = 1;

/// Public per-round randomness for the polynomial hash.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashParams<const P: u64> {
    alpha: Fp<P>,
}

impl<const P: u64> HashParams<P> {
    pub fn new(alpha: Fp<P>) -> Result<Self, CryptoError> {
        if alpha.is_zero() {
            return Err(CryptoError::ZeroAlpha);
        }
        Ok(HashParams { alpha })
    }

    pub fn alpha(&self) -> Fp<P> {
        self.alpha
    }
}

/// `sum_{j=1..m} part[j] * alpha^j`.
///
/// Linear in `part`, so the hash of a coded part is the coded hash of the
/// uncoded parts.
pub fn poly_hash<const P: u64>(part: &[Fp<P>], params: &HashParams<P>) -> Result<Fp<P>, CryptoError> {
    if part.is_empty() {
        return Err(CryptoError::EmptyInput);
    }
    // Horner from the top, then one extra factor of alpha for the 1-based exponent.
    let inner = part
        .iter()
        .rev()
        .fold(Fp::ZERO, |acc, &v| acc * params.alpha + v);
    Ok(inner * params.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_codec::Fe;
    use proptest::prelude::*;

    type F11 = Fp<11>;

    #[test]
    fn small_field_example() {
        let params = HashParams::new(F11::new(2)).unwrap();
        let direct = F11::new(3) * F11::new(2) + F11::new(4) * F11::new(4);
        assert_eq!(direct, F11::ZERO);
        assert_eq!(poly_hash(&[F11::new(3), F11::new(4)], &params).unwrap(), F11::ZERO);
        assert_eq!(poly_hash(&[F11::new(1)], &params).unwrap(), F11::new(2));
    }

    #[test]
    fn zero_vector_and_errors() {
        let params = HashParams::new(Fe::new(99)).unwrap();
        assert_eq!(poly_hash(&[Fe::ZERO; 8], &params).unwrap(), Fe::ZERO);
        assert_eq!(poly_hash::<{ crate::field_codec::MERSENNE61 }>(&[], &params), Err(CryptoError::EmptyInput));
        assert_eq!(HashParams::new(Fe::ZERO), Err(CryptoError::ZeroAlpha));
    }

    proptest! {
        #[test]
        fn linear(p in prop::collection::vec(any::<u64>(), 1..20), seed in any::<u64>(), a in any::<u64>(), b in any::<u64>(), alpha in 1u64..1000) {
            let params = HashParams::new(Fe::new(alpha)).unwrap();
            let p: Vec<Fe> = p.into_iter().map(Fe::new).collect();
            let q: Vec<Fe> = (0..p.len() as u64).map(|j| Fe::new(seed.wrapping_mul(j + 1))).collect();
            let (a, b) = (Fe::new(a), Fe::new(b));
            let mix: Vec<Fe> = p.iter().zip(&q).map(|(&x, &y)| a * x + b * y).collect();
            prop_assert_eq!(
                poly_hash(&mix, &params).unwrap(),
                a * poly_hash(&p, &params).unwrap() + b * poly_hash(&q, &params).unwrap()
            );
        }
    }
}
