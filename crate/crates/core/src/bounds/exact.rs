//! Exact rational arithmetic and rigorous enclosures for `exp`, `2^x` and square roots.

use crate::rational::Rational;
use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn big_int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn big_uint(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, x.clone()))
}

/// Exact generalized binomial for rational `x`.
pub fn gen_binom_exact(x: &BigRational, s: u64) -> BigRational {
    if s == 0 {
        return BigRational::one();
    }
    if *x < big_int(s) {
        return BigRational::zero();
    }
    let mut r = BigRational::one();
    for i in 0..s {
        r = r * (x - big_int(i)) / big_int(i + 1);
    }
    r
}

/// `ln 2` lies in `[LN2_LO, LN2_HI]`.
pub fn ln2_bounds() -> (BigRational, BigRational) {
    let den = BigInt::from(10u64).pow(16);
    (
        BigRational::new(BigInt::from(6931471805599453u64), den.clone()),
        BigRational::new(BigInt::from(6931471805599454u64), den),
    )
}

/// `floor(sqrt(x) 2^bits) / 2^bits` and the matching upper bound.
pub fn sqrt_bounds(x: &BigRational, bits: u32) -> (BigRational, BigRational) {
    assert!(!x.is_negative(), "square root of a negative number");
    // sqrt(p/q) = sqrt(p q) / q
    let pq = (x.numer() * x.denom()) << (2 * bits as usize);
    let root = pq.sqrt();
    let exact = &root * &root == pq;
    let den = x.denom() << bits as usize;
    let lo = BigRational::new(root.clone(), den.clone());
    let hi = if exact { lo.clone() } else { BigRational::new(root + 1, den) };
    (lo, hi)
}

/// Positive rational in fixed point `v / 2^bits`, rounded toward `down`.
fn to_fixed(x: &BigRational, bits: usize, down: bool) -> BigInt {
    let scaled = x * BigRational::from_integer(BigInt::one() << bits);
    if down {
        scaled.floor().to_integer()
    } else {
        scaled.ceil().to_integer()
    }
}

/// `base^(2^j)` by repeated squaring in fixed point, rounded consistently down or up.
fn pow2k_fixed(base: &BigRational, j: u32, bits: usize, down: bool) -> BigRational {
    let mut v = to_fixed(base, bits, down);
    for _ in 0..j {
        let sq = &v * &v;
        v = if down { sq >> bits } else { (sq + ((BigInt::one() << bits) - 1)) >> bits };
    }
    BigRational::new(v, BigInt::one() << bits)
}

/// Rigorous `(lo, hi)` with `lo <= e^z <= hi`.
pub fn exp_bounds(z: &BigRational) -> (BigRational, BigRational) {
    if z.is_negative() {
        let (lo, hi) = exp_bounds(&-z);
        return (hi.recip(), lo.recip());
    }
    if z.is_zero() {
        return (BigRational::one(), BigRational::one());
    }
    let mag = z.ceil().to_integer().bits() as u32;
    let j = 64 + 2 * mag;
    let n = BigRational::from_integer(BigInt::one() << j as usize);
    // (1 - z/N)^N is about e^{-z}, so it needs roughly 1.45 z extra bits.
    let bits = (j + 96) as usize + 2 * z.ceil().to_integer().to_usize().expect("exponent fits in usize");
    // (1 + z/N)^N <= e^z <= (1 - z/N)^{-N} for N > z.
    let lo = pow2k_fixed(&(BigRational::one() + z / &n), j, bits, true);
    let inv = pow2k_fixed(&(BigRational::one() - z / &n), j, bits, true);
    (lo, inv.recip())
}

/// Rigorous bounds on `2^r`.
pub fn pow2_bounds(r: &BigRational) -> (BigRational, BigRational) {
    let (l2_lo, l2_hi) = ln2_bounds();
    if r.is_negative() {
        (exp_bounds(&(r * l2_hi)).0, exp_bounds(&(r * l2_lo)).1)
    } else {
        (exp_bounds(&(r * l2_lo)).0, exp_bounds(&(r * l2_hi)).1)
    }
}
