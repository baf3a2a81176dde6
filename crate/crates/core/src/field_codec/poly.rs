//! Dense univariate polynomials over `Fp<P>`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CodecError, Fp};

/// Polynomial with coefficients stored lowest degree first, trailing zeros stripped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polynomial<const P: u64> {
    coeffs: Vec<Fp<P>>,
}

impl<const P: u64> Polynomial<P> {
    pub fn new(mut coeffs: Vec<Fp<P>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_u64s(coeffs: &[u64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Fp::new(c)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Fp<P>) -> Self {
        Self::new(vec![c])
    }

    /// `x - root`
    pub fn linear_root(root: Fp<P>) -> Self {
        Polynomial {
            coeffs: vec![-root, Fp::ONE],
        }
    }

    pub fn coeffs(&self) -> &[Fp<P>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Fp<P> {
        self.coeffs.last().copied().unwrap_or(Fp::ZERO)
    }

    pub fn eval(&self, x: Fp<P>) -> Fp<P> {
        self.coeffs.iter().rev().fold(Fp::ZERO, |acc, &c| acc * x + c)
    }

    pub fn eval_many(&self, xs: &[Fp<P>]) -> Vec<Fp<P>> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| self.coeff(i) + other.coeff(i))
            .collect();
        Self::new(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| self.coeff(i) - other.coeff(i))
            .collect();
        Self::new(coeffs)
    }

    pub fn scale(&self, k: Fp<P>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Fp::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Euclidean division, returning `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), CodecError> {
        let d_deg = divisor.degree().ok_or(CodecError::DivisionByZero)?;
        let lead_inv = divisor.leading().inv()?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= d_deg {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![Fp::ZERO; rem.len() - d_deg];
        for i in (0..quot.len()).rev() {
            let c = rem[i + d_deg] * lead_inv;
            quot[i] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= c * dc;
            }
        }
        rem.truncate(d_deg);
        Ok((Self::new(quot), Self::new(rem)))
    }

    fn coeff(&self, i: usize) -> Fp<P> {
        self.coeffs.get(i).copied().unwrap_or(Fp::ZERO)
    }
}

/// Lagrange interpolation through `points`, O(n^2).
///
/// The result has degree at most `points.len() - 1`.
pub fn lagrange_interpolate<const P: u64>(
    points: &[(Fp<P>, Fp<P>)],
) -> Result<Polynomial<P>, CodecError> {
    let mut seen = BTreeSet::new();
    for &(x, _) in points {
        if !seen.insert(x) {
            return Err(CodecError::DuplicatePoint(x.value()));
        }
    }
    if points.is_empty() {
        return Ok(Polynomial::zero());
    }

    // master(x) = prod (x - x_i)
    let mut master = vec![Fp::ONE];
    for &(xi, _) in points {
        let mut next = vec![Fp::ZERO; master.len() + 1];
        for (k, &c) in master.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * xi;
        }
        master = next;
    }

    let n = points.len();
    let mut acc = vec![Fp::ZERO; n];
    let mut basis = vec![Fp::ZERO; n];
    for &(xi, yi) in points {
        // synthetic division master / (x - xi)
        let mut carry = Fp::ZERO;
        for k in (0..n).rev() {
            carry = master[k + 1] + carry * xi;
            basis[k] = carry;
        }
        let denom = basis.iter().rev().fold(Fp::ZERO, |a, &c| a * xi + c);
        let weight = yi * denom.inv()?;
        for (a, &b) in acc.iter_mut().zip(&basis) {
            *a += weight * b;
        }
    }
    Ok(Polynomial::new(acc))
}
