//! Exact rational parameters (δ, ε, ...) and exact threshold comparisons.

use crate::error::{domain, Result};
use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

pub type Rational = Ratio<i128>;

/// Parses `p/q`, a decimal such as `0.25`, or an integer, exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| domain(format!("bad rational '{t}'")))?;
        let q: i128 = q.trim().parse().map_err(|_| domain(format!("bad rational '{t}'")))?;
        if q == 0 {
            return Err(domain(format!("zero denominator in '{t}'")));
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(domain(format!("bad rational '{t}'")));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(domain(format!("bad rational '{t}'")));
    }
    if frac_part.len() > 30 {
        return Err(domain(format!("too many decimal digits in '{t}'")));
    }
    let digits = format!("{int_part}{frac_part}");
    let num: i128 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| domain(format!("bad rational '{t}'")))? };
    let den = 10i128.pow(frac_part.len() as u32);
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Best rational approximation with denominator `10^9`, for derived irrational parameters.
pub fn from_f64(x: f64) -> Rational {
    let den = 1_000_000_000i128;
    Rational::new((x * den as f64).round() as i128, den)
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn to_string(r: &Rational) -> String {
    if r.denom() == &1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serializes as `"p/q"` (or `"p"`), for `#[serde(serialize_with)]`.
pub fn serialize<S: serde::Serializer>(r: &Rational, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&to_string(r))
}

/// `lhs >= coeff * rhs` exactly.
pub fn ge_scaled(lhs: i128, coeff: &Rational, rhs: i128) -> bool {
    lhs * coeff.denom() >= coeff.numer() * rhs
}

/// `lhs < coeff * rhs` exactly.
pub fn lt_scaled(lhs: i128, coeff: &Rational, rhs: i128) -> bool {
    !ge_scaled(lhs, coeff, rhs)
}

/// `x >= sqrt(r)` for `x` rational, `r >= 0`.
pub fn ge_sqrt(x: &Rational, r: &Rational) -> bool {
    !x.is_negative() && x * x >= *r
}

/// `x > sqrt(r)`.
pub fn gt_sqrt(x: &Rational, r: &Rational) -> bool {
    !x.is_negative() && x * x > *r
}

/// `⌈x⌉` for rational `x`.
pub fn ceil(x: &Rational) -> i128 {
    x.ceil().to_integer()
}

pub fn floor(x: &Rational) -> i128 {
    x.floor().to_integer()
}

/// Smallest integer `k >= 0` with `k >= c * sqrt(m)`, `c >= 0`.
pub fn ceil_coeff_sqrt(c: &Rational, m: u64) -> u64 {
    // k^2 * den^2 >= num^2 * m
    let (p, q) = (*c.numer(), *c.denom());
    if p.is_zero() {
        return 0;
    }
    let target = p * p * m as i128;
    let mut k = ((target / (q * q)) as u128).sqrt() as i128;
    while k > 0 && (k - 1) * (k - 1) * q * q >= target {
        k -= 1;
    }
    while k * k * q * q < target {
        k += 1;
    }
    k as u64
}

/// `⌈√m⌉`.
pub fn ceil_sqrt(m: u64) -> u64 {
    ceil_coeff_sqrt(&Rational::from_integer(1), m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_ratios() {
        assert_eq!(parse_rational("0.9").unwrap(), Rational::new(9, 10));
        assert_eq!(parse_rational("2/6").unwrap(), Rational::new(1, 3));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new(-3, 2));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn ceil_sqrt_matches_definition() {
        for m in 0..500u64 {
            let k = ceil_sqrt(m);
            assert!(k * k >= m);
            assert!(k == 0 || (k - 1) * (k - 1) < m);
        }
        // (1 + 1/0.2^2) sqrt(9) = 26 * 3
        let eps = Rational::new(1, 5);
        let c = Rational::from_integer(1) + (eps * eps).recip();
        assert_eq!(ceil_coeff_sqrt(&c, 9), 78);
    }

    #[test]
    fn scaled_comparisons_are_exact() {
        let d = Rational::new(9, 10);
        assert!(ge_scaled(12, &d, 12)); // 12 >= 10.8
        assert!(!ge_scaled(10, &d, 12));
        assert!(ge_scaled(108, &d, 120));
    }
}
