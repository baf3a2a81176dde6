use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Probability that a committee of `lambda` independent draws, each
/// Byzantine with probability 1/3, has a Byzantine majority.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureBound {
    pub lambda: usize,
    numer: BigUint,
    denom: BigUint,
    /// `mantissa * 2^exponent >= value`, with a `precision`-bit mantissa.
    pub mantissa: BigUint,
    pub exponent: i64,
    pub precision: u32,
}

impl FailureBound {
    pub fn exact(&self) -> BigRational {
        BigRational::new(self.numer.clone().into(), self.denom.clone().into())
    }

    /// `log2` of the rounded-up bound.
    pub fn log2(&self) -> f64 {
        let shift = self.mantissa.bits().saturating_sub(64);
        let top = (&self.mantissa >> shift).to_f64().unwrap();
        top.log2() + shift as f64 + self.exponent as f64
    }

    /// Whether the exact value is strictly below `2^e`.
    pub fn below_pow2(&self, e: i64) -> bool {
        let (mut lhs, mut rhs) = (self.numer.clone(), self.denom.clone());
        if e >= 0 {
            rhs <<= e as u64;
        } else {
            lhs <<= e.unsigned_abs();
        }
        lhs < rhs
    }

    /// Scientific notation with `digits` significant digits, rounded up.
    pub fn decimal(&self, digits: u32) -> String {
        scientific(&self.numer, &self.denom, digits)
    }
}

/// `num / den` in scientific notation with `digits` significant digits,
/// rounded up.
pub fn scientific(num: &BigUint, den: &BigUint, digits: u32) -> String {
    assert!(digits >= 1 && !den.is_zero());
    if num.is_zero() {
        return "0".into();
    }
    let ten = BigUint::from(10u32);
    // value * 10^s lies in [10^(digits-1), 10^digits) for s = digits - 1 - d.
    let mut d = ((num.bits() as f64 - den.bits() as f64) * std::f64::consts::LOG10_2).floor() as i64;
    let lo = ten.pow(digits - 1);
    let hi = ten.pow(digits);
    loop {
        let s = digits as i64 - 1 - d;
        let (a, b) = if s >= 0 {
            (num * ten.pow(s as u32), den.clone())
        } else {
            (num.clone(), den * ten.pow((-s) as u32))
        };
        let floor = &a / &b;
        if floor < lo {
            d -= 1;
            continue;
        }
        if floor >= hi {
            d += 1;
            continue;
        }
        let mut q = a.div_ceil(&b);
        if q == hi {
            q = lo.clone();
            d += 1;
        }
        let q = q.to_string();
        let (head, tail) = q.split_at(1);
        return if tail.is_empty() {
            format!("{head}e{d}")
        } else {
            format!("{head}.{tail}e{d}")
        };
    }
}

fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for i in 1..=n {
        c = c * BigUint::from(n + 1 - i) / BigUint::from(i);
        row.push(c.clone());
    }
    row
}

/// Sum over `i > lambda/2` of `C(lambda, i) (1/3)^i (2/3)^(lambda-i)`,
/// computed exactly and rounded up to a `precision`-bit float.
pub fn committee_failure_prob(lambda: usize, precision: u32) -> FailureBound {
    assert!(lambda >= 1 && precision >= 2);
    let row = binomial_row(lambda);
    let mut numer = BigUint::zero();
    for (i, c) in row.iter().enumerate().skip(lambda / 2 + 1) {
        numer += c << (lambda - i) as u64;
    }
    let denom = BigUint::from(3u32).pow(lambda as u32);
    let (mantissa, exponent) = round_up(&numer, &denom, precision);
    FailureBound {
        lambda,
        numer,
        denom,
        mantissa,
        exponent,
        precision,
    }
}

/// Smallest `m * 2^e >= num / den` with `m` exactly `precision` bits.
fn round_up(num: &BigUint, den: &BigUint, precision: u32) -> (BigUint, i64) {
    if num.is_zero() {
        return (BigUint::zero(), 0);
    }
    let mut e = num.bits() as i64 - den.bits() as i64 - precision as i64;
    loop {
        let (a, b) = if e >= 0 {
            (num.clone(), den << e as u64)
        } else {
            (num << e.unsigned_abs(), den.clone())
        };
        let m = a.div_ceil(&b);
        match m.bits().cmp(&(precision as u64)) {
            std::cmp::Ordering::Less => e -= 1,
            std::cmp::Ordering::Greater => e += 1,
            std::cmp::Ordering::Equal => return (m, e),
        }
    }
}

/// Same event when the committee is drawn without replacement from `n`
/// nodes of which `f` are Byzantine.
pub fn hypergeometric_failure_prob(n: usize, f: usize, lambda: usize) -> BigRational {
    assert!(lambda <= n && f <= n);
    let choose = |a: usize, b: usize| -> BigUint {
        if b > a {
            BigUint::zero()
        } else {
            binomial_row(a).swap_remove(b)
        }
    };
    let mut numer = BigUint::zero();
    for i in lambda / 2 + 1..=lambda.min(f) {
        numer += choose(f, i) * choose(n - f, lambda - i);
    }
    BigRational::new(numer.into(), choose(n, lambda).into())
}
