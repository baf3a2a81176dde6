//! Prime-field elements with the modulus fixed at compile time.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use super::CodecError;

/// The Mersenne prime 2^61 - 1, used for production runs.
pub const MERSENNE61: u64 = (1 << 61) - 1;

/// An element of the prime field GF(P).
///
/// The stored value is always reduced, so derived equality and hashing are
/// field equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fp<const P: u64>(u64);

/// Field element over the production modulus.
pub type Fe = Fp<MERSENNE61>;

impl<const P: u64> Fp<P> {
    pub const MODULUS: u64 = P;
    pub const ZERO: Self = Fp(0);
    pub const ONE: Self = Fp(1);

    /// Reduces an arbitrary `u64` into the field.
    pub fn new(value: u64) -> Self {
        Fp(value % P)
    }

    /// Builds an element from a value already known to be reduced.
    pub fn from_canonical(value: u64) -> Option<Self> {
        (value < P).then_some(Fp(value))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base *= base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(self) -> Result<Self, CodecError> {
        if self.is_zero() {
            return Err(CodecError::DivisionByZero);
        }
        Ok(self.pow(P - 2))
    }

    fn reduce_wide(x: u128) -> u64 {
        if P == MERSENNE61 {
            // x < 2^122, so two folds bring it below 2^62.
            let lo = (x as u64) & MERSENNE61;
            let hi = (x >> 61) as u64;
            let mut r = lo + hi;
            if r >= MERSENNE61 {
                r -= MERSENNE61;
            }
            r
        } else {
            (x % P as u128) as u64
        }
    }
}

impl<const P: u64> Add for Fp<P> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let (sum, carry) = self.0.overflowing_add(rhs.0);
        if carry || sum >= P {
            Fp(sum.wrapping_sub(P))
        } else {
            Fp(sum)
        }
    }
}

impl<const P: u64> Sub for Fp<P> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        if self.0 >= rhs.0 {
            Fp(self.0 - rhs.0)
        } else {
            Fp(P - rhs.0 + self.0)
        }
    }
}

impl<const P: u64> Mul for Fp<P> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Fp(Self::reduce_wide(self.0 as u128 * rhs.0 as u128))
    }
}

impl<const P: u64> Neg for Fp<P> {
    type Output = Self;

    fn neg(self) -> Self {
        Self::ZERO - self
    }
}

impl<const P: u64> AddAssign for Fp<P> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const P: u64> SubAssign for Fp<P> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const P: u64> MulAssign for Fp<P> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<const P: u64> std::iter::Sum for Fp<P> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl<const P: u64> From<u64> for Fp<P> {
    fn from(value: u64) -> Self {
        Self::new(value)
    }
}

impl<const P: u64> fmt::Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> fmt::Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Field operation selector, for callers that dispatch on an opcode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Pow,
}

/// Applies `op` to `a` (and `b`, ignored for `Inv`; used as the exponent for `Pow`).
pub fn ff_op<const P: u64>(a: Fp<P>, b: Fp<P>, op: FieldOp) -> Result<Fp<P>, CodecError> {
    Ok(match op {
        FieldOp::Add => a + b,
        FieldOp::Sub => a - b,
        FieldOp::Mul => a * b,
        FieldOp::Inv => a.inv()?,
        FieldOp::Pow => a.pow(b.value()),
    })
}
