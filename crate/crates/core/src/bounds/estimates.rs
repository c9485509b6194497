//! Checkers for the binomial estimates used in the counting proofs.
//!
//! Each checker works in log2 floating point and re-decides any comparison whose relative
//! slack is below [`NEAR`] in exact rational arithmetic.

use super::binom::{log2_big, log2_gen_binom};
use super::exact::{big, big_int, big_uint, exp_bounds, gen_binom_exact, pow2_bounds, sqrt_bounds};
use crate::error::{domain, Result};
use crate::oracle::binomial;
use crate::rational::{ge_sqrt, to_f64, Rational};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use std::f64::consts::LOG2_E;

/// Relative log2 slack below which a comparison is redone exactly.
pub const NEAR: f64 = 1e-6;

fn near(lhs: f64, rhs: f64) -> bool {
    (lhs - rhs).abs() <= NEAR * rhs.abs().max(1.0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct B1Report {
    #[serde(serialize_with = "crate::oracle::ser_big")]
    pub max_value: BigUint,
    pub argmax: u64,
    pub inequality_holds: bool,
    pub monotone_holds: bool,
}

/// `max_x binom(x, s1) binom(m-x, s2) <= 4m² binom(s1 m/(s1+s2), s1) binom(s2 m/(s1+s2), s2)`
/// and unimodality around `⌊(s1 m + s1)/(s1+s2)⌋`.
pub fn lemma_b1_check(s1: u64, s2: u64, m: u64) -> Result<B1Report> {
    if !(1 <= s1 && s1 <= s2 && s2 <= m && s1 + s2 <= m) {
        return Err(domain(format!("need 1 <= s1 <= s2 <= m and s1 + s2 <= m, got s1 = {s1}, s2 = {s2}, m = {m}")));
    }
    let f: Vec<BigUint> = (0..=m).map(|x| binomial(x, s1) * binomial(m - x, s2)).collect();
    let (mut argmax, mut max_value) = (0, BigUint::zero());
    for (x, v) in f.iter().enumerate() {
        if *v > max_value {
            argmax = x as u64;
            max_value = v.clone();
        }
    }
    let peak = ((s1 * m + s1) / (s1 + s2)) as usize;
    let monotone_holds = f[..=peak].windows(2).all(|w| w[0] <= w[1]) && f[peak..].windows(2).all(|w| w[0] >= w[1]);
    let total = big_int(s1 + s2);
    let rhs = big_int(4 * m * m)
        * gen_binom_exact(&(big_int(s1 * m) / &total), s1)
        * gen_binom_exact(&(big_int(s2 * m) / &total), s2);
    let inequality_holds = big_uint(&max_value) <= rhs;
    Ok(B1Report { max_value, argmax, inequality_holds, monotone_holds })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "kebab-case")]
pub enum Part {
    Holds,
    Fails,
    OutOfDomain(String),
}

impl Part {
    fn from(ok: bool) -> Self {
        if ok {
            Part::Holds
        } else {
            Part::Fails
        }
    }

    pub fn failed(&self) -> bool {
        *self == Part::Fails
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct B2Report {
    pub part1: Part,
    pub part2: Part,
    pub part3: Part,
    /// Comparisons settled in exact arithmetic.
    pub exact_rechecks: usize,
}

/// The three generalized-binomial ratio estimates.
pub fn lemma_b2_check(a: &Rational, b: &Rational, d: &Rational, eps: &Rational, delta: &Rational, s: u64) -> B2Report {
    let zero = Rational::from_integer(0);
    let sr = Rational::from_integer(s as i128);
    let mut rechecks = 0;
    let part1 = if s == 0 || !(sr <= *b && b <= a) {
        Part::OutOfDomain("need s >= 1 and s <= b <= a".into())
    } else {
        // binom(b, s) <= (b/a)^s binom(a, s)
        let lhs = log2_gen_binom(to_f64(b), s);
        let rhs = s as f64 * (to_f64(b) / to_f64(a)).log2() + log2_gen_binom(to_f64(a), s);
        if near(lhs, rhs) {
            rechecks += 1;
            let (ab, bb) = (big(a), big(b));
            Part::from(gen_binom_exact(&bb, s) <= num_traits::pow(&bb / &ab, s as usize) * gen_binom_exact(&ab, s))
        } else {
            Part::from(lhs <= rhs)
        }
    };
    let grown = (Rational::from_integer(1) + eps) * d;
    let part2 = if s == 0 || sr > *d || *d <= zero || Rational::from_integer(8) / d >= *eps || *eps >= Rational::new(1, 2) {
        Part::OutOfDomain("need 1 <= s <= d and 8/d < eps < 1/2".into())
    } else {
        // binom((1+ε)d, s) <= e^{8√ε s} binom(d, s)
        let lhs = log2_gen_binom(to_f64(&grown), s);
        let rhs = 8.0 * to_f64(eps).sqrt() * s as f64 * LOG2_E + log2_gen_binom(to_f64(d), s);
        if near(lhs, rhs) {
            rechecks += 1;
            let (root, _) = sqrt_bounds(&big(eps), 96);
            let (factor, _) = exp_bounds(&(root * big_int(8 * s)));
            Part::from(gen_binom_exact(&big(&grown), s) <= factor * gen_binom_exact(&big(d), s))
        } else {
            Part::from(lhs <= rhs)
        }
    };
    let part3 = if s == 0 || *delta <= zero || *eps <= zero || (Rational::from_integer(1) + delta) * sr > *d {
        Part::OutOfDomain("need delta > 0, eps > 0 and (1+delta)s <= d".into())
    } else {
        // binom((1+ε)d, s) <= (1 + ε + ε/δ)^s binom(d, s)
        let base = Rational::from_integer(1) + eps + eps / delta;
        let lhs = log2_gen_binom(to_f64(&grown), s);
        let rhs = s as f64 * to_f64(&base).log2() + log2_gen_binom(to_f64(d), s);
        if near(lhs, rhs) {
            rechecks += 1;
            Part::from(
                gen_binom_exact(&big(&grown), s) <= num_traits::pow(big(&base), s as usize) * gen_binom_exact(&big(d), s),
            )
        } else {
            Part::from(lhs <= rhs)
        }
    };
    B2Report { part1, part2, part3, exact_rechecks: rechecks }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct B3Report {
    pub holds: bool,
    /// `D` had no integer points.
    pub empty: bool,
    pub argmax: Option<(u64, u64)>,
    pub max_log2: f64,
    pub rhs_log2: f64,
    pub exact_recheck: bool,
}

/// Hypotheses of the off-balance estimate, each checked exactly.
fn b3_hypotheses(s1: u64, s2: u64, m: u64, delta: &Rational, eps: &Rational) -> Result<()> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    let total = (s1 + s2) as i128;
    let low = s1.min(s2) as i128;
    // s1, s2, m positive integers
    if s1 == 0 || s2 == 0 || m == 0 {
        return Err(domain("s1, s2, m must be positive"));
    }
    // δ, ε ∈ (0, 1)
    if *delta <= zero || *delta >= one || *eps <= zero || *eps >= one {
        return Err(domain("delta and eps must lie in (0, 1)"));
    }
    // (1+δ)(s1+s2) <= m
    if (one + delta) * Rational::from_integer(total) > Rational::from_integer(m as i128) {
        return Err(domain("(1+delta)(s1+s2) <= m fails"));
    }
    // s1 + s2 >= 2^5 / δ
    if Rational::from_integer(total) < Rational::from_integer(32) / delta {
        return Err(domain("s1 + s2 >= 2^5/delta fails"));
    }
    // 2√ε min{s1, s2} >= 1, i.e. 4 ε min² >= 1
    if Rational::from_integer(4 * low * low) * eps < one {
        return Err(domain("2 sqrt(eps) min{s1, s2} >= 1 fails"));
    }
    // 2^10 min² / (m² (s1+s2)²) <= ε <= δ² min² / (2^10 (s1+s2)²)
    let lo = Rational::new(1024 * low * low, (m as i128) * (m as i128) * total * total);
    let hi = delta * delta * Rational::new(low * low, 1024 * total * total);
    if *eps < lo {
        return Err(domain("eps >= 2^10 min^2 / (m^2 (s1+s2)^2) fails"));
    }
    if *eps > hi {
        return Err(domain("eps <= delta^2 min^2 / (2^10 (s1+s2)^2) fails"));
    }
    Ok(())
}

/// Smallest integer `x` with `x >= s1 m/(s1+s2) + 2√ε m`, decided exactly.
fn b3_x_floor(s1: u64, s2: u64, m: u64, eps: &Rational) -> u64 {
    let c = Rational::new((s1 * m) as i128, (s1 + s2) as i128);
    let four_eps_m2 = Rational::from_integer(4 * (m as i128) * (m as i128)) * eps;
    let guess = (to_f64(&c) + 2.0 * to_f64(eps).sqrt() * m as f64).floor().max(0.0) as u64;
    let ok = |x: u64| {
        let gap = Rational::from_integer(x as i128) - c;
        ge_sqrt(&gap, &four_eps_m2)
    };
    let mut x = guess.saturating_sub(2);
    while !ok(x) {
        x += 1;
    }
    x
}

fn b3_rhs_log2(s1: u64, s2: u64, m: u64, eps: &Rational) -> f64 {
    let total = (s1 + s2) as f64;
    -to_f64(eps) * total * LOG2_E
        + log2_gen_binom(s1 as f64 * m as f64 / total, s1)
        + log2_gen_binom(s2 as f64 * m as f64 / total, s2)
}

fn b3_rhs_lower_exact(s1: u64, s2: u64, m: u64, eps: &Rational) -> BigRational {
    let total = big_int(s1 + s2);
    let (factor, _) = exp_bounds(&-(big(eps) * &total));
    factor * gen_binom_exact(&(big_int(s1 * m) / &total), s1) * gen_binom_exact(&(big_int(s2 * m) / &total), s2)
}

fn f_log2(t: u64, x: u64, s1: u64, s2: u64) -> f64 {
    log2_gen_binom(x as f64, s1) + log2_gen_binom((t - x) as f64, s2)
}

/// Scans every `t` of `D`; for fixed `t` the maximizing `x` is the unimodal peak clamped to `D`.
pub fn lemma_b3_check(s1: u64, s2: u64, m: u64, delta: &Rational, eps: &Rational) -> Result<B3Report> {
    b3_hypotheses(s1, s2, m, delta, eps)?;
    let t_max = ((Rational::from_integer(1) + Rational::from_integer(2) * eps) * Rational::from_integer(m as i128))
        .floor()
        .to_integer() as u64;
    let x_lo = b3_x_floor(s1, s2, m, eps);
    let rhs_log2 = b3_rhs_log2(s1, s2, m, eps);
    let mut cands: Vec<(f64, u64, u64)> = Vec::new();
    for t in (s1 + s2)..=t_max {
        if x_lo + s2 > t {
            continue;
        }
        let peak = (s1 * t + s1) / (s1 + s2);
        let x = peak.clamp(x_lo, t - s2);
        cands.push((f_log2(t, x, s1, s2), t, x));
    }
    b3_decide(cands, s1, s2, m, eps, rhs_log2)
}

/// Every integer point of `D`; for cross-checking the scan.
pub fn lemma_b3_brute(s1: u64, s2: u64, m: u64, delta: &Rational, eps: &Rational) -> Result<B3Report> {
    b3_hypotheses(s1, s2, m, delta, eps)?;
    let t_max = ((Rational::from_integer(1) + Rational::from_integer(2) * eps) * Rational::from_integer(m as i128))
        .floor()
        .to_integer() as u64;
    let x_lo = b3_x_floor(s1, s2, m, eps);
    let mut cands = Vec::new();
    for t in (s1 + s2)..=t_max {
        for x in x_lo..=t.saturating_sub(s2) {
            cands.push((f_log2(t, x, s1, s2), t, x));
        }
    }
    b3_decide(cands, s1, s2, m, eps, b3_rhs_log2(s1, s2, m, eps))
}

fn b3_decide(cands: Vec<(f64, u64, u64)>, s1: u64, s2: u64, m: u64, eps: &Rational, rhs_log2: f64) -> Result<B3Report> {
    let Some(&(max_log2, t, x)) = cands.iter().max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)).then(b.2.cmp(&a.2)))
    else {
        return Ok(B3Report { holds: true, empty: true, argmax: None, max_log2: f64::NEG_INFINITY, rhs_log2, exact_recheck: false });
    };
    if !near(max_log2, rhs_log2) {
        return Ok(B3Report {
            holds: max_log2 <= rhs_log2,
            empty: false,
            argmax: Some((t, x)),
            max_log2,
            rhs_log2,
            exact_recheck: false,
        });
    }
    let rhs = b3_rhs_lower_exact(s1, s2, m, eps);
    let holds = cands
        .iter()
        .filter(|c| near(c.0, rhs_log2) || c.0 > rhs_log2)
        .all(|&(_, t, x)| big_uint(&(binomial(x, s1) * binomial(t - x, s2))) <= rhs);
    Ok(B3Report { holds, empty: false, argmax: Some((t, x)), max_log2, rhs_log2, exact_recheck: true })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct B4Report {
    pub holds: bool,
    pub empty: bool,
    pub lhs_log2: f64,
    pub rhs_log2: f64,
    pub exact_recheck: bool,
}

/// `Σ_{i=⌈Γδs⌉}^{s} binom(t, s-i) binom(δt, i) <= 2^{-Γδs} binom(t, s)`.
pub fn lemma_b4_check(delta: &Rational, gamma: &Rational, t: &Rational, s: u64) -> Result<B4Report> {
    let zero = Rational::from_integer(0);
    if *delta <= zero || *t <= zero || s == 0 {
        return Err(domain("need delta, t > 0 and s >= 1"));
    }
    if *gamma < Rational::from_integer(32) {
        return Err(domain("Gamma >= 2^5 fails"));
    }
    if Rational::from_integer(4 * s as i128) > Rational::from_integer(3) * t {
        return Err(domain("s <= 3t/4 fails"));
    }
    let exponent = gamma * delta * Rational::from_integer(s as i128);
    let (pow_lo, _) = pow2_bounds(&big(&exponent));
    if pow_lo < big_int(s) {
        return Err(domain("s <= 2^{Gamma delta s} fails"));
    }
    let start = exponent.ceil().to_integer();
    let rhs_log2 = -to_f64(&exponent) + log2_gen_binom(to_f64(t), s);
    if start > s as i128 {
        return Ok(B4Report { holds: true, empty: true, lhs_log2: f64::NEG_INFINITY, rhs_log2, exact_recheck: false });
    }
    let (tf, dt) = (to_f64(t), to_f64(&(delta * t)));
    let terms: Vec<f64> = (start as u64..=s).map(|i| log2_gen_binom(tf, s - i) + log2_gen_binom(dt, i)).collect();
    let lhs_log2 = super::binom::log2_sum_exp2(&terms);
    if !near(lhs_log2, rhs_log2) {
        return Ok(B4Report { holds: lhs_log2 <= rhs_log2, empty: false, lhs_log2, rhs_log2, exact_recheck: false });
    }
    let (tb, db) = (big(t), big(&(delta * t)));
    let lhs: BigRational = (start as u64..=s).map(|i| gen_binom_exact(&tb, s - i) * gen_binom_exact(&db, i)).sum();
    let (factor, _) = pow2_bounds(&-big(&exponent));
    let holds = lhs <= factor * gen_binom_exact(&tb, s);
    Ok(B4Report { holds, empty: false, lhs_log2, rhs_log2, exact_recheck: true })
}

/// `log2` of an exact count, for callers comparing against bounds.
pub fn log2_count(x: &BigUint) -> f64 {
    log2_big(x)
}


#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i128, q: i128) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn b1_examples() {
        let rep = lemma_b1_check(1, 1, 4).unwrap();
        assert_eq!((rep.max_value.clone(), rep.argmax), (BigUint::from(4u32), 2));
        assert!(rep.inequality_holds && rep.monotone_holds);
        let rep = lemma_b1_check(1, 2, 3).unwrap();
        assert_eq!((rep.max_value.clone(), rep.argmax), (BigUint::from(1u32), 1));
        assert!(lemma_b1_check(2, 1, 5).is_err());
        assert!(lemma_b1_check(3, 4, 7).unwrap().inequality_holds);
    }

    #[test]
    fn b2_examples() {
        let rep = lemma_b2_check(&r(4, 1), &r(3, 1), &r(100, 1), &r(49, 100), &r(1, 1), 2);
        assert_eq!(rep.part1, Part::Holds);
        let rep = lemma_b2_check(&r(4, 1), &r(4, 1), &r(100, 1), &r(49, 100), &r(1, 1), 50);
        assert_eq!(rep.part2, Part::Holds);
        assert!(matches!(rep.part1, Part::OutOfDomain(_)));
        let rep = lemma_b2_check(&r(5, 1), &r(5, 1), &r(20, 1), &r(1, 10), &r(1, 1), 10);
        assert_eq!(rep.part3, Part::Holds);
        // b = a is an equality, settled exactly.
        let rep = lemma_b2_check(&r(7, 2), &r(7, 2), &r(1, 1), &r(1, 10), &r(1, 1), 2);
        assert_eq!(rep.part1, Part::Holds);
        assert_eq!(rep.exact_rechecks, 1);
    }

    #[test]
    fn b3_hypotheses_are_named() {
        let err = lemma_b3_check(10, 10, 100, &r(1, 2), &r(1, 100)).unwrap_err();
        assert!(err.to_string().contains("2^5/delta"));
    }

    #[test]
    fn b3_scan_matches_brute_force() {
        // δ = 9/10: needs s1+s2 >= 36, m >= 1138, min² >= 16(s1+s2)/δ.
        let delta = r(9, 10);
        for (s1, s2, m) in [(40, 40, 1200), (36, 44, 1300), (50, 45, 1500)] {
            let low = s1.min(s2) as i128;
            let total = (s1 + s2) as i128;
            let hi = delta * delta * Rational::new(low * low, 1024 * total * total);
            for eps in [hi, hi * r(9, 10)] {
                let fast = lemma_b3_check(s1, s2, m, &delta, &eps);
                let slow = lemma_b3_brute(s1, s2, m, &delta, &eps);
                match (fast, slow) {
                    (Ok(f), Ok(b)) => {
                        assert!(f.holds && b.holds);
                        assert_eq!(f.argmax, b.argmax);
                        assert!((f.max_log2 - b.max_log2).abs() < 1e-9);
                    }
                    (Err(_), Err(_)) => {}
                    other => panic!("{other:?}"),
                }
            }
        }
    }

    #[test]
    fn b4_examples() {
        let rep = lemma_b4_check(&r(1, 20), &r(32, 1), &r(100, 1), 20).unwrap();
        assert!(rep.empty && rep.holds);
        let rep = lemma_b4_check(&r(1, 1000), &r(32, 1), &r(1000, 1), 500).unwrap();
        assert!(!rep.empty && rep.holds);
        assert!(lemma_b4_check(&r(1, 20), &r(31, 1), &r(100, 1), 20).is_err());
    }
}
