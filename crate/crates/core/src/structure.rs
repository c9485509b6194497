//! Arithmetic-progression covers, the Lev–Smeliansky containment, the two-set stability
//! dichotomy and sampled structure statistics.

use crate::error::{domain, Result};
use crate::group::{GroundSet, GroupSpec};
use crate::oracle::{census_asymmetric, census_symmetric, EnumOptions, FamilyCensus};
use crate::rational::{ge_sqrt, to_f64, Rational};
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct APCover {
    pub start: i64,
    pub difference: i64,
    pub length: u64,
    pub uncovered: usize,
}

impl APCover {
    pub fn contains(&self, x: i64) -> bool {
        let off = x - self.start;
        off >= 0 && off % self.difference == 0 && ((off / self.difference) as u64) < self.length
    }
}

fn sorted(a: &[i64]) -> Vec<i64> {
    let set: BTreeSet<i64> = a.iter().copied().collect();
    set.into_iter().collect()
}

/// Best AP of difference `d` and length at most `max_len`, starting at an element of `a`
/// (any optimal AP can be slid up to its first covered element). Length is trimmed to the last covered element.
fn best_with_difference(a: &[i64], d: i64, max_len: u64) -> APCover {
    let mut best: Option<APCover> = None;
    let reach = (max_len as i64 - 1).saturating_mul(d);
    for (i, &x) in a.iter().enumerate() {
        let mut covered = 0;
        let mut last = x;
        for &y in &a[i..] {
            if y - x > reach {
                break;
            }
            if (y - x) % d == 0 {
                covered += 1;
                last = y;
            }
        }
        let cand = APCover { start: x, difference: d, length: ((last - x) / d + 1) as u64, uncovered: a.len() - covered };
        if best.map_or(true, |b| cand.uncovered < b.uncovered) {
            best = Some(cand);
        }
    }
    best.unwrap_or(APCover { start: 0, difference: d, length: 1, uncovered: 0 })
}

/// AP of length at most `max_len` missing the fewest elements of `a`; ties go to smaller difference, then smaller start.
pub fn ap_cover_search(a: &[i64], max_len: u64) -> Result<APCover> {
    if a.is_empty() {
        return Err(domain("AP cover of an empty set"));
    }
    if max_len == 0 {
        return Err(domain("AP length must be at least 1"));
    }
    let a = sorted(a);
    let span = a[a.len() - 1] - a[0];
    let mut best: Option<APCover> = None;
    for d in 1..=span.max(1) {
        let cand = best_with_difference(&a, d, max_len);
        if best.map_or(true, |b| cand.uncovered < b.uncovered) {
            best = Some(cand);
            if cand.uncovered == 0 {
                break;
            }
        }
    }
    Ok(best.expect("at least one difference"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevSmelianskyReport {
    pub applicable: bool,
    pub sumset_size: usize,
    pub conclusion_holds: Option<bool>,
    pub witnesses: Option<(APCover, APCover)>,
}

fn span_gcd(a: &[i64]) -> i64 {
    a.iter().fold(0i64, |g, &x| g.gcd(&(x - a[0])))
}

/// If `|A+B| <= |A| + |B| + min(|A|, |B|) - 4`, `A` and `B` lie in same-difference APs of lengths
/// at most `|A+B| - |B| + 1` and `|A+B| - |A| + 1`.
pub fn lev_smeliansky_check(a: &[i64], b: &[i64]) -> Result<LevSmelianskyReport> {
    if a.is_empty() || b.is_empty() {
        return Err(domain("Lev–Smeliansky check needs nonempty sets"));
    }
    let (a, b) = (sorted(a), sorted(b));
    let sums: BTreeSet<i64> = a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect();
    let n_ab = sums.len() as i64;
    let (na, nb) = (a.len() as i64, b.len() as i64);
    let applicable = n_ab <= na + nb + na.min(nb) - 4;
    if !applicable {
        return Ok(LevSmelianskyReport { applicable, sumset_size: sums.len(), conclusion_holds: None, witnesses: None });
    }
    // Every common difference divides both span gcds; the largest gives the shortest APs.
    let d = span_gcd(&a).gcd(&span_gcd(&b)).max(1);
    let pa = APCover { start: a[0], difference: d, length: ((a[a.len() - 1] - a[0]) / d + 1) as u64, uncovered: 0 };
    let pb = APCover { start: b[0], difference: d, length: ((b[b.len() - 1] - b[0]) / d + 1) as u64, uncovered: 0 };
    let ok = pa.length as i64 <= n_ab - nb + 1 && pb.length as i64 <= n_ab - na + 1;
    Ok(LevSmelianskyReport { applicable, sumset_size: sums.len(), conclusion_holds: Some(ok), witnesses: Some((pa, pb)) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_hypothesis: Option<String>,
    pub out_pairs: usize,
    pub alternative_a: bool,
    pub alternative_b: bool,
    /// Largest allowed AP lengths and exception counts per side.
    pub limits: [(u64, usize); 2],
    pub witnesses: Option<(APCover, APCover)>,
}

impl StabilityReport {
    /// `a ∨ b` whenever the hypotheses hold.
    pub fn consistent(&self) -> bool {
        !self.applicable || self.alternative_a || self.alternative_b
    }
}

/// Largest integer `L` with `L <= r w + c √ε w`.
fn floor_plus_sqrt(r: &Rational, c: i128, eps: &Rational, w: usize) -> u64 {
    let base = r * Rational::from_integer(w as i128);
    let radicand = Rational::from_integer(c * c * (w as i128) * (w as i128)) * eps;
    let fits = |l: i64| {
        let gap = Rational::from_integer(l as i128) - base;
        gap <= Rational::from_integer(0) || !ge_sqrt(&gap, &radicand) || gap * gap == radicand
    };
    let mut l = (to_f64(&base) + c as f64 * to_f64(eps).sqrt() * w as f64).floor() as i64 + 2;
    while l > 0 && !fits(l) {
        l -= 1;
    }
    l.max(0) as u64
}

/// The two-set stability dichotomy on integer sets. Hypotheses are checked exactly; when they
/// fail the report is marked not applicable and nothing is asserted.
pub fn stability_check(d1: &[i64], d2: &[i64], w: &[i64], eps: &Rational, s1: u64, s2: u64) -> StabilityReport {
    let (d1, d2) = (sorted(d1), sorted(d2));
    let wset: BTreeSet<i64> = w.iter().copied().collect();
    let (n1, n2, nw) = (d1.len(), d2.len(), wset.len());
    let total = (s1 + s2) as i128;
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    let shares = [Rational::new(s1 as i128, total.max(1)), Rational::new(s2 as i128, total.max(1))];
    let sizes = [n1, n2];
    let failed = if s1 == 0 || s1 > s2 {
        Some("1 <= s1 <= s2")
    } else if *eps <= zero || *eps > Rational::new(1, 256) * shares[0] * shares[0] {
        Some("0 < eps <= 2^-8 (s1/(s1+s2))^2")
    } else if (one - eps) * Rational::from_integer(nw as i128) > Rational::from_integer((n1 + n2) as i128) {
        Some("(1-eps)|W| <= |D1| + |D2|")
    } else if (0..2).any(|i| {
        let gap = Rational::from_integer(sizes[i] as i128) - shares[i] * Rational::from_integer(nw as i128);
        gap > zero && !(gap * gap <= Rational::from_integer(4 * (nw as i128) * (nw as i128)) * eps)
    }) {
        Some("|D_i| <= (s_i/(s1+s2) + 2 sqrt(eps))|W|")
    } else {
        None
    };
    let out_pairs = d1.iter().map(|x| d2.iter().filter(|y| !wset.contains(&(x + *y))).count()).sum::<usize>();
    let alternative_a =
        Rational::from_integer(out_pairs as i128) >= eps * eps * Rational::from_integer((n1 * n2) as i128);
    let limits = [0, 1].map(|i| {
        let len = floor_plus_sqrt(&shares[i], 4, eps, nw);
        let exceptions = (eps * Rational::from_integer(sizes[i] as i128)).floor().to_integer() as usize;
        (len, exceptions)
    });
    let mut witnesses = None;
    if limits[0].0 >= 1 && limits[1].0 >= 1 {
        let span = [&d1, &d2].iter().filter(|d| !d.is_empty()).map(|d| d[d.len() - 1] - d[0]).max().unwrap_or(0).max(1);
        for d in 1..=span {
            let p1 = best_with_difference(&d1, d, limits[0].0);
            let p2 = best_with_difference(&d2, d, limits[1].0);
            if p1.uncovered <= limits[0].1 && p2.uncovered <= limits[1].1 {
                witnesses = Some((p1, p2));
                break;
            }
        }
    }
    StabilityReport {
        applicable: failed.is_none(),
        failed_hypothesis: failed.map(str::to_string),
        out_pairs,
        alternative_a,
        alternative_b: witnesses.is_some(),
        limits,
        witnesses,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub m: usize,
    pub s: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s2: Option<usize>,
    pub members: u64,
    pub samples: usize,
    pub max_lengths: Vec<u64>,
    /// Uncovered count (summed over both sets for pairs) to number of samples.
    pub histogram: BTreeMap<usize, usize>,
}

/// `⌈x m / y + c m⌉`.
fn ceil_share(x: usize, y: usize, c: &Rational, m: usize) -> u64 {
    let v = Rational::new((x * m) as i128, y as i128) + c * Rational::from_integer(m as i128);
    v.ceil().to_integer().max(1) as u64
}

/// Samples census members uniformly with a ChaCha stream per sample index and reports how
/// close they are to APs of length `⌈m/2 + c m⌉` (or the share-weighted lengths for pairs).
pub fn sample_structure_experiment(
    ground: &GroundSet,
    m: usize,
    s: usize,
    s2: Option<usize>,
    samples: usize,
    seed: u64,
    slack: &Rational,
    opts: &EnumOptions,
) -> Result<StructureReport> {
    if *ground.spec() != GroupSpec::Integers {
        return Err(domain("structure experiments need an integer ground set"));
    }
    let census: FamilyCensus = match s2 {
        None => census_symmetric(ground, m, s, opts)?,
        Some(s2) => census_asymmetric(ground, m, s, s2, opts)?,
    };
    if !census.materialized {
        return Err(domain("census was not materialized; raise the member cap"));
    }
    let max_lengths = match s2 {
        None => vec![ceil_share(1, 2, slack, m)],
        Some(s2) => vec![ceil_share(s, s + s2, slack, m), ceil_share(s2, s + s2, slack, m)],
    };
    let pairs = census.pairs();
    let count = pairs.len();
    let uncovered: Vec<usize> = (0..if count == 0 { 0 } else { samples })
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (a, b) = &pairs[rng.gen_range(0..count)];
            let cover = |set, len| ap_cover_search(&ground.ints(set), len).map(|c| c.uncovered).unwrap_or(0);
            match s2 {
                None => cover(a, max_lengths[0]),
                Some(_) => cover(a, max_lengths[0]) + cover(b, max_lengths[1]),
            }
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for u in uncovered {
        *histogram.entry(u).or_insert(0) += 1;
    }
    Ok(StructureReport {
        m,
        s,
        s2,
        members: census.count.to_u64().unwrap_or(u64::MAX),
        samples: if count == 0 { 0 } else { samples },
        max_lengths,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every integer start, every difference, full length.
    fn naive(a: &[i64], max_len: u64) -> (usize, i64) {
        let (lo, hi) = (*a.iter().min().unwrap(), *a.iter().max().unwrap());
        let mut best = (usize::MAX, 0);
        for d in 1..=(hi - lo).max(1) {
            for start in (lo - (max_len as i64 - 1) * d)..=hi {
                let miss = a.iter().filter(|&&x| !(x >= start && (x - start) % d == 0 && (x - start) / d < max_len as i64)).count();
                if miss < best.0 {
                    best = (miss, d);
                }
            }
        }
        best
    }

    #[test]
    fn cover_examples() {
        let c = ap_cover_search(&[2, 4, 6, 8], 4).unwrap();
        assert_eq!((c.difference, c.uncovered, c.start, c.length), (2, 0, 2, 4));
        assert_eq!(ap_cover_search(&[1, 2, 4, 8], 3).unwrap().uncovered, 2);
        assert_eq!(ap_cover_search(&[5], 1).unwrap().uncovered, 0);
        assert!(ap_cover_search(&[], 3).is_err());
    }

    #[test]
    fn cover_matches_naive_exhaustively_on_small_sets() {
        for mask in 1u32..(1 << 9) {
            let a: Vec<i64> = (0..9).filter(|i| mask >> i & 1 == 1).collect();
            for len in 1..6 {
                let c = ap_cover_search(&a, len).unwrap();
                assert_eq!((c.uncovered, c.difference), naive(&a, len), "{a:?} {len}");
                assert!(c.length <= len);
                assert_eq!(a.iter().filter(|x| !c.contains(**x)).count(), c.uncovered);
            }
        }
    }

    #[test]
    fn lev_smeliansky_examples() {
        let r = lev_smeliansky_check(&[1, 2, 3, 4], &[1, 2, 3]).unwrap();
        assert!(r.applicable && r.conclusion_holds == Some(true));
        assert!(!lev_smeliansky_check(&[1, 2, 3], &[1, 2]).unwrap().applicable);
        assert!(!lev_smeliansky_check(&[4], &[4]).unwrap().applicable);
        let r = lev_smeliansky_check(&[0, 2, 4, 6], &[0, 2, 4, 8]).unwrap();
        assert_eq!(r.witnesses.unwrap().0.difference, 2);
    }

    #[test]
    fn stability_structured_and_spread() {
        let eps = Rational::new(1, 1024);
        let d: Vec<i64> = (1..=40).collect();
        let w: Vec<i64> = (2..=80).collect();
        let r = stability_check(&d, &d, &w, &eps, 1, 1);
        assert!(r.applicable && r.alternative_b);
        assert_eq!(r.witnesses.unwrap().0.difference, 1);
        // A spread set forces many sums out of W.
        let spread: Vec<i64> = (0..38).map(|i| i * i).collect();
        let w: Vec<i64> = (0..76).collect();
        let r = stability_check(&spread, &spread, &w, &eps, 1, 1);
        assert!(r.applicable && r.alternative_a);
        let r = stability_check(&d, &d, &w, &Rational::new(1, 100), 1, 1);
        assert!(!r.applicable && r.consistent());
    }

    #[test]
    fn stability_small_counterexample() {
        // Every hypothesis holds, yet all sums stay in W and D1 needs an AP of length 6 > 5.
        let (d1, d2): (Vec<i64>, Vec<i64>) = (vec![0, 1, 2, 3, 5], vec![0, 1, 2, 3]);
        let w: Vec<i64> = (0..=8).collect();
        let r = stability_check(&d1, &d2, &w, &Rational::new(1, 1024), 1, 1);
        assert!(r.applicable);
        assert_eq!(r.out_pairs, 0);
        assert_eq!(r.limits, [(5, 0), (5, 0)]);
        assert!(!r.alternative_a && !r.alternative_b);
    }

    #[test]
    fn extremal_doubling_samples_are_progressions() {
        let g = GroundSet::interval(1, 14).unwrap();
        let rep = sample_structure_experiment(&g, 7, 4, None, 50, 9, &Rational::from_integer(0), &EnumOptions::default()).unwrap();
        assert_eq!(rep.histogram, BTreeMap::from([(0, 50)]));
        let again = sample_structure_experiment(&g, 7, 4, None, 50, 9, &Rational::from_integer(0), &EnumOptions::default()).unwrap();
        assert_eq!(rep, again);
        let none = sample_structure_experiment(&g, 7, 4, None, 0, 9, &Rational::from_integer(0), &EnumOptions::default()).unwrap();
        assert!(none.histogram.is_empty());
    }
}
