//! Dilates of gcd-1 seed sets as an explicit family with small doubling, and the product
//! lower bound for pairs.

use crate::error::{domain, Error, Result};
use crate::group::GroundSet;
use crate::oracle::{binomial, census_asymmetric, census_symmetric, ser_big, EnumOptions};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeSet, HashSet};

/// Sets `A` of size `s` with `min A = 0`, `max A = a` and `gcd(A) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeedFamily {
    pub a: u64,
    pub s: usize,
    pub members: Vec<Vec<i64>>,
}

/// `{t + d·A ⊆ [1..n] : t, d >= 1, A ∈ T_a}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DilateFamily {
    pub a: u64,
    pub n: u64,
    pub s: usize,
    /// Number of `(t, d, A)` triples.
    pub raw: usize,
    pub members: Vec<Vec<i64>>,
}

impl DilateFamily {
    /// `|T_a| · Σ_{t=1}^{n} ⌊(n-t)/a⌋`.
    pub fn predicted(&self, seeds: usize) -> u64 {
        seeds as u64 * (1..=self.n).map(|t| (self.n - t) / self.a).sum::<u64>()
    }
}

fn cap_check(what: &str, estimate: u128, cap: u128) -> Result<()> {
    if estimate > cap {
        return Err(Error::CapExceeded { what: what.to_string(), estimate, cap });
    }
    Ok(())
}

pub fn build_t_a(a: u64, s: usize, cost_cap: u128) -> Result<SeedFamily> {
    if a < 1 || s < 2 {
        return Err(domain("seed sets need a >= 1 and s >= 2"));
    }
    let est = binomial(a - 1, s as u64 - 2).to_u128().unwrap_or(u128::MAX);
    cap_check("seed sets", est, cost_cap)?;
    let mut members = Vec::new();
    let mut inner: Vec<i64> = Vec::with_capacity(s - 2);
    fn walk(next: i64, a: i64, need: usize, inner: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if need == 0 {
            // gcd(0, x) = x, so 0 contributes nothing.
            if inner.iter().fold(a, |g, x| g.gcd(x)) == 1 {
                let mut set = vec![0];
                set.extend_from_slice(inner);
                set.push(a);
                out.push(set);
            }
            return;
        }
        for x in next..a {
            if (a - x) < need as i64 {
                break;
            }
            inner.push(x);
            walk(x + 1, a, need - 1, inner, out);
            inner.pop();
        }
    }
    if a as usize + 1 >= s {
        walk(1, a as i64, s - 2, &mut inner, &mut members);
    }
    Ok(SeedFamily { a, s, members })
}

pub fn build_d_an(seeds: &SeedFamily, n: u64, cost_cap: u128) -> Result<DilateFamily> {
    let a = seeds.a;
    let pairs: u128 = (1..=n).map(|t| ((n - t) / a) as u128).sum();
    cap_check("dilate family", pairs * seeds.members.len() as u128, cost_cap)?;
    let mut members = Vec::new();
    for base in &seeds.members {
        for d in 1..=(n.saturating_sub(1) / a) {
            for t in 1..=(n - d * a) {
                members.push(base.iter().map(|x| t as i64 + d as i64 * x).collect::<Vec<i64>>());
            }
        }
    }
    let raw = members.len();
    let distinct: HashSet<&Vec<i64>> = members.iter().collect();
    if distinct.len() != raw {
        return Err(Error::Falsified(format!("dilates of T_{a} collide: {} distinct of {raw}", distinct.len())));
    }
    Ok(DilateFamily { a, n, s: seeds.s, raw, members })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DilateCount {
    pub a: u64,
    pub seeds: usize,
    pub seed_bound: u64,
    pub count: usize,
    pub predicted: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DilateReport {
    pub n: u64,
    pub m: usize,
    pub s: usize,
    /// The size hypotheses `6s <= 0.99m` and `(m+1)/2 <= 0.99n` do not hold.
    pub relaxed: bool,
    pub per_a_counts: Vec<DilateCount>,
    pub total: u64,
    #[serde(serialize_with = "ser_big")]
    pub census: BigUint,
    pub disjoint: bool,
    pub members_in_family: bool,
    pub counts_match: bool,
    pub seed_bound_holds: bool,
    pub sound: bool,
}

impl DilateReport {
    pub fn holds(&self) -> bool {
        self.disjoint && self.members_in_family && self.counts_match && self.seed_bound_holds && self.sound
    }
}

fn doubling_size(a: &[i64]) -> usize {
    a.iter().flat_map(|x| a.iter().map(move |y| x + y)).collect::<BTreeSet<_>>().len()
}

/// Builds `D_{a,n}` for `⌈3s/2⌉ <= a <= ⌊(m+1)/2⌋`, then checks pairwise disjointness,
/// membership in the small-doubling family and the total against the exact census.
pub fn verify_dilate_family(n: u64, m: usize, s: usize, relaxed: bool, opts: &EnumOptions) -> Result<DilateReport> {
    if s < 2 || n < 1 {
        return Err(domain("need s >= 2 and n >= 1"));
    }
    let in_range = 600 * s as u128 <= 99 * m as u128 && 100 * (m as u128 + 1) <= 198 * n as u128;
    if !in_range && !relaxed {
        return Err(domain(format!("need 6s <= 0.99m and (m+1)/2 <= 0.99n; got n = {n}, m = {m}, s = {s}")));
    }
    let lo = (3 * s as u64).div_ceil(2);
    let hi = (m as u64 + 1) / 2;
    let families: Vec<(usize, u64, DilateFamily)> = (lo..=hi)
        .into_par_iter()
        .map(|a| {
            let seeds = build_t_a(a, s, opts.cost_cap)?;
            let bound = binomial(a - 1, s as u64 - 2).to_u64().unwrap_or(u64::MAX);
            Ok((seeds.members.len(), bound, build_d_an(&seeds, n, opts.cost_cap)?))
        })
        .collect::<Result<_>>()?;
    let mut seen: HashSet<&[i64]> = HashSet::new();
    let mut disjoint = true;
    let mut members_in_family = true;
    let mut per_a_counts = Vec::new();
    for (seeds, seed_bound, fam) in &families {
        for set in &fam.members {
            disjoint &= seen.insert(set.as_slice());
            members_in_family &= set.len() >= s && doubling_size(set) <= m && set[0] >= 1 && set[set.len() - 1] <= n as i64;
        }
        per_a_counts.push(DilateCount {
            a: fam.a,
            seeds: *seeds,
            seed_bound: *seed_bound,
            count: fam.members.len(),
            predicted: fam.predicted(*seeds),
        });
    }
    let total: u64 = per_a_counts.iter().map(|c| c.count as u64).sum();
    let ground = GroundSet::interval(1, n as i64)?;
    let census = census_symmetric(&ground, m, s, &EnumOptions { materialize: false, ..*opts })?.count;
    Ok(DilateReport {
        n,
        m,
        s,
        relaxed: !in_range,
        counts_match: per_a_counts.iter().all(|c| c.count as u64 == c.predicted),
        seed_bound_holds: per_a_counts.iter().all(|c| c.seeds as u64 <= c.seed_bound),
        per_a_counts,
        total,
        sound: BigUint::from(total) <= census,
        census,
        disjoint,
        members_in_family,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymLowerBound {
    pub x: u64,
    #[serde(serialize_with = "ser_big")]
    pub value: BigUint,
    pub log2: f64,
}

/// `binom(x, s)·binom(m-x, s')` with `x = ⌊sm/(s+s')⌋`: pairs inside `[1..x] x [1..m-x]`.
pub fn asym_lower_bound(n: u64, m: u64, s: u64, s2: u64) -> Result<AsymLowerBound> {
    if s == 0 || s > s2 {
        return Err(domain("need 1 <= s <= s'"));
    }
    let x = s * m / (s + s2);
    if x > n || m - x > n {
        return Err(domain(format!("x = {x} and m - x = {} must both be at most n = {n}", m - x)));
    }
    let value = binomial(x, s) * binomial(m - x, s2);
    let log2 = crate::bounds::binom::log2_big(&value);
    Ok(AsymLowerBound { x, value, log2 })
}

/// `asym_lower_bound` against the exact pair census on `[1..n]`.
pub fn asym_lower_bound_sound(n: u64, m: u64, s: u64, s2: u64, opts: &EnumOptions) -> Result<bool> {
    let lb = asym_lower_bound(n, m, s, s2)?;
    let ground = GroundSet::interval(1, n as i64)?;
    let census = census_asymmetric(&ground, m as usize, s as usize, s2 as usize, &EnumOptions { materialize: false, ..*opts })?;
    Ok(lb.value <= census.count)
}
