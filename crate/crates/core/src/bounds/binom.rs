//! Generalized binomials and log2-scale helpers.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::LN_2;

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::Sum<f64> for Neumaier {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::default();
        iter.for_each(|x| acc.add(x));
        acc
    }
}

/// `x(x-1)...(x-s+1)/s!` for `x >= s`, else 0.
pub fn gen_binom(x: f64, s: u64) -> f64 {
    if s == 0 {
        return 1.0;
    }
    if x < s as f64 {
        return 0.0;
    }
    if s <= 64 {
        (0..s).map(|i| (x - i as f64) / (i + 1) as f64).product()
    } else {
        log2_gen_binom(x, s).exp2()
    }
}

/// `log2 gen_binom(x, s)`, `-inf` when the binomial vanishes.
pub fn log2_gen_binom(x: f64, s: u64) -> f64 {
    if s == 0 {
        return 0.0;
    }
    if x < s as f64 {
        return f64::NEG_INFINITY;
    }
    if s <= 256 {
        (0..s).map(|i| ((x - i as f64) / (i + 1) as f64).log2()).sum::<Neumaier>().value()
    } else {
        (ln_gamma(x + 1.0) - ln_gamma(x - s as f64 + 1.0) - ln_gamma(s as f64 + 1.0)) / LN_2
    }
}

pub fn log2_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    log2_gen_binom(n as f64, k.min(n - k))
}

/// `log2` of an arbitrary-precision integer, `-inf` for zero.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").log2();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("64-bit mantissa").log2() + shift as f64
}

/// `log2 Σ_{k <= m} binom(n, k)`.
pub fn log2_binom_le(n: u64, m: u64) -> f64 {
    let total: BigUint = (0..=m.min(n)).map(|k| crate::oracle::binomial(n, k)).sum();
    log2_big(&total)
}

/// `log2 Σ 2^{x_i}`.
pub fn log2_sum_exp2(terms: &[f64]) -> f64 {
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + terms.iter().map(|t| (t - top).exp2()).sum::<Neumaier>().value().log2()
}
