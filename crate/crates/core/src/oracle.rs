//! Exhaustive enumeration of small-sumset families and container coverage checks.

use crate::error::{Error, Result};
use crate::group::GroundSet;
use crate::pipeline::ContainerTriple;
use crate::set::IndexSet;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

pub const DEFAULT_COST_CAP: u128 = 100_000_000;
pub const DEFAULT_MEMBER_CAP: usize = 10_000_000;

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CensusMode {
    Sym,
    Unrefined,
    Asym,
    AsymUnrefined,
}

impl CensusMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sym" => Ok(CensusMode::Sym),
            "unrefined" => Ok(CensusMode::Unrefined),
            "asym" => Ok(CensusMode::Asym),
            "asym-unrefined" => Ok(CensusMode::AsymUnrefined),
            _ => Err(Error::Usage(format!("unknown mode {s:?}; expected sym, asym, unrefined or asym-unrefined"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Member {
    Set(IndexSet),
    Pair(IndexSet, IndexSet),
}

#[derive(Clone, Copy, Debug)]
pub struct EnumOptions {
    pub cost_cap: u128,
    pub member_cap: usize,
    pub materialize: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { cost_cap: DEFAULT_COST_CAP, member_cap: DEFAULT_MEMBER_CAP, materialize: true }
    }
}

pub(crate) fn ser_big<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(x) => s.serialize_u64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyCensus {
    pub mode: CensusMode,
    pub m: usize,
    pub s: Option<usize>,
    pub s2: Option<usize>,
    pub min_size: Option<usize>,
    #[serde(serialize_with = "ser_big")]
    pub count: BigUint,
    /// False when materialization was off or the member cap was hit.
    pub materialized: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<Member>,
}

impl FamilyCensus {
    pub fn sets(&self) -> Vec<IndexSet> {
        self.members
            .iter()
            .filter_map(|m| match m {
                Member::Set(a) => Some(a.clone()),
                Member::Pair(..) => None,
            })
            .collect()
    }

    pub fn pairs(&self) -> Vec<(IndexSet, IndexSet)> {
        self.members
            .iter()
            .map(|m| match m {
                Member::Set(a) => (a.clone(), a.clone()),
                Member::Pair(a, b) => (a.clone(), b.clone()),
            })
            .collect()
    }
}

fn check_cap(what: &str, estimate: &BigUint, cap: u128) -> Result<()> {
    let est = estimate.to_u128().unwrap_or(u128::MAX);
    if est > cap {
        return Err(Error::CapExceeded { what: what.to_string(), estimate: est, cap });
    }
    Ok(())
}

fn partial_binom_sum(n: u64, lo: u64, hi: u64) -> BigUint {
    (lo..=hi.min(n)).map(|k| binomial(n, k)).sum()
}

/// What the DFS measures the sumset against.
#[derive(Clone, Copy)]
enum Against<'a> {
    /// `A + A`.
    Itself,
    /// `A + X` for fixed `X`.
    Fixed(&'a IndexSet),
}

struct Dfs<'a> {
    ground: &'a GroundSet,
    against: Against<'a>,
    m: usize,
    /// Inclusive size window of reported sets.
    lo: usize,
    hi: usize,
}

impl Dfs<'_> {
    fn extend(&self, sums: &mut IndexSet, chosen: &IndexSet, x: usize) {
        match self.against {
            Against::Itself => {
                for y in chosen.iter() {
                    sums.insert(self.ground.sum_index(x, y));
                }
                sums.insert(self.ground.sum_index(x, x));
            }
            Against::Fixed(f) => {
                for y in f.iter() {
                    sums.insert(self.ground.sum_index(x, y));
                }
            }
        }
    }

    fn walk(&self, chosen: &mut IndexSet, sums: &IndexSet, next: usize, visit: &mut dyn FnMut(&IndexSet)) {
        let size = chosen.count();
        if size >= self.lo {
            visit(chosen);
        }
        if size == self.hi {
            return;
        }
        for x in next..self.ground.n() {
            let mut grown = sums.clone();
            self.extend(&mut grown, chosen, x);
            if grown.count() > self.m {
                continue;
            }
            chosen.insert(x);
            self.walk(chosen, &grown, x + 1, visit);
            chosen.remove(x);
        }
    }

    /// Sets in lexicographic index order, one rayon task per leading element.
    fn collect(&self, cap: usize, materialize: bool) -> (BigUint, Vec<IndexSet>, bool) {
        let n = self.ground.n();
        let mut total = BigUint::zero();
        let mut out = Vec::new();
        let mut complete = materialize;
        if self.lo == 0 {
            total += 1u32;
            if materialize {
                out.push(self.ground.empty_y());
            }
        }
        if self.hi == 0 {
            return (total, out, complete);
        }
        let shards: Vec<(u64, Vec<IndexSet>, bool)> = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut chosen = self.ground.empty_y();
                let mut sums = self.ground.empty_sums();
                self.extend(&mut sums, &chosen, x);
                let mut count = 0u64;
                let mut members = Vec::new();
                let mut full = materialize;
                if sums.count() <= self.m {
                    chosen.insert(x);
                    let mut visit = |set: &IndexSet| {
                        count += 1;
                        if full {
                            if members.len() < cap {
                                members.push(set.clone());
                            } else {
                                full = false;
                                members = Vec::new();
                            }
                        }
                    };
                    self.walk(&mut chosen, &sums, x + 1, &mut visit);
                }
                (count, members, full)
            })
            .collect();
        for (count, members, full) in shards {
            total += count;
            complete &= full;
            if complete {
                out.extend(members);
                if out.len() > cap {
                    complete = false;
                }
            }
        }
        if !complete {
            out.clear();
        }
        (total, out, complete)
    }
}

fn census_from(
    mode: CensusMode,
    m: usize,
    (s, s2, min_size): (Option<usize>, Option<usize>, Option<usize>),
    (count, members, materialized): (BigUint, Vec<Member>, bool),
) -> FamilyCensus {
    FamilyCensus { mode, m, s, s2, min_size, count, materialized, members: if materialized { members } else { Vec::new() } }
}

/// `{A ⊆ Y : |A| = s, |A+A| <= m}`.
pub fn census_symmetric(ground: &GroundSet, m: usize, s: usize, opts: &EnumOptions) -> Result<FamilyCensus> {
    if s > ground.n() {
        return Err(crate::error::domain(format!("s = {s} exceeds n = {}", ground.n())));
    }
    check_cap("census sym", &binomial(ground.n() as u64, s as u64), opts.cost_cap)?;
    let dfs = Dfs { ground, against: Against::Itself, m, lo: s, hi: s };
    let (count, sets, ok) = dfs.collect(opts.member_cap, opts.materialize);
    Ok(census_from(CensusMode::Sym, m, (Some(s), None, None), (count, sets.into_iter().map(Member::Set).collect(), ok)))
}

/// `{A ⊆ Y : |A+A| <= m}`.
pub fn census_unrefined(ground: &GroundSet, m: usize, opts: &EnumOptions) -> Result<FamilyCensus> {
    let n = ground.n();
    check_cap("census unrefined", &partial_binom_sum(n as u64, 0, m as u64), opts.cost_cap)?;
    let dfs = Dfs { ground, against: Against::Itself, m, lo: 0, hi: n.min(m) };
    let (count, sets, ok) = dfs.collect(opts.member_cap, opts.materialize);
    Ok(census_from(CensusMode::Unrefined, m, (None, None, None), (count, sets.into_iter().map(Member::Set).collect(), ok)))
}

/// `{(A, B) : |A| = s, |B| = s', |A+B| <= m}`.
pub fn census_asymmetric(ground: &GroundSet, m: usize, s: usize, s2: usize, opts: &EnumOptions) -> Result<FamilyCensus> {
    let n = ground.n();
    if s > n || s2 > n {
        return Err(crate::error::domain(format!("sizes ({s}, {s2}) exceed n = {n}")));
    }
    let cost = binomial(n as u64, s as u64) * binomial(n as u64, s2 as u64);
    check_cap("census asym", &cost, opts.cost_cap)?;
    let firsts = Dfs { ground, against: Against::Itself, m: usize::MAX, lo: s, hi: s }.collect(usize::MAX, true).1;
    pair_census(ground, CensusMode::Asym, m, firsts, s2, s2, (Some(s), Some(s2), None), opts)
}

/// `{(A, B) ∈ 2^Y × 2^Y : |A+B| <= m, |A|, |B| >= minSize}`.
pub fn census_asym_unrefined(ground: &GroundSet, m: usize, min_size: usize, opts: &EnumOptions) -> Result<FamilyCensus> {
    let n = ground.n();
    let side = partial_binom_sum(n as u64, 1, m as u64);
    check_cap("census asym-unrefined", &(&side * &side), opts.cost_cap)?;
    let lo = min_size.max(1);
    let hi = n.min(m);
    let firsts = if lo > hi {
        Vec::new()
    } else {
        Dfs { ground, against: Against::Itself, m: usize::MAX, lo, hi }.collect(usize::MAX, true).1
    };
    let mut census = pair_census(ground, CensusMode::AsymUnrefined, m, firsts, lo, hi, (None, None, Some(min_size)), opts)?;
    if min_size == 0 {
        // Pairs with an empty side have an empty sumset: 2^n + 2^n - 1 of them.
        let empties = (BigUint::one() << (n + 1)) - 1u32;
        if census.materialized {
            let mut members = Vec::new();
            let all = Dfs { ground, against: Against::Itself, m: usize::MAX, lo: 0, hi: n }.collect(usize::MAX, true).1;
            for b in &all {
                members.push(Member::Pair(ground.empty_y(), b.clone()));
            }
            for a in all.iter().skip(1) {
                members.push(Member::Pair(a.clone(), ground.empty_y()));
            }
            if members.len() + census.members.len() > opts.member_cap {
                census.materialized = false;
                census.members.clear();
            } else {
                members.extend(std::mem::take(&mut census.members));
                census.members = members;
            }
        }
        census.count += empties;
    }
    Ok(census)
}

#[allow(clippy::too_many_arguments)]
fn pair_census(
    ground: &GroundSet,
    mode: CensusMode,
    m: usize,
    firsts: Vec<IndexSet>,
    lo: usize,
    hi: usize,
    sizes: (Option<usize>, Option<usize>, Option<usize>),
    opts: &EnumOptions,
) -> Result<FamilyCensus> {
    let parts: Vec<(BigUint, Vec<IndexSet>, bool)> = firsts
        .par_iter()
        .map(|a| Dfs { ground, against: Against::Fixed(a), m, lo, hi }.collect(opts.member_cap, opts.materialize))
        .collect();
    let mut count = BigUint::zero();
    let mut members = Vec::new();
    let mut ok = opts.materialize;
    for (a, (c, bs, full)) in firsts.iter().zip(parts) {
        count += c;
        ok &= full;
        if ok {
            members.extend(bs.into_iter().map(|b| Member::Pair(a.clone(), b)));
            if members.len() > opts.member_cap {
                ok = false;
                members.clear();
            }
        }
    }
    if !ok {
        members.clear();
    }
    Ok(census_from(mode, m, sizes, (count, members, ok)))
}

/// Pairs `(A, F)` with `|F| = λ`, `|A| >= s`, `|A+F| <= m`; the first-stage generating family.
pub fn fingerprint_family(
    ground: &GroundSet,
    m: usize,
    s: usize,
    lambda: usize,
    opts: &EnumOptions,
) -> Result<Vec<(IndexSet, IndexSet)>> {
    let n = ground.n();
    let cost = binomial(n as u64, lambda as u64) * partial_binom_sum(n as u64, s as u64, m as u64);
    check_cap("first-stage family", &cost, opts.cost_cap)?;
    if s > m || lambda > n || s > n {
        return Ok(Vec::new());
    }
    let fs = Dfs { ground, against: Against::Itself, m: usize::MAX, lo: lambda, hi: lambda }.collect(usize::MAX, true).1;
    let census = pair_census(ground, CensusMode::Asym, m, fs, s, n.min(m), (Some(s), Some(lambda), None), opts)?;
    if !census.materialized {
        return Err(Error::CapExceeded {
            what: "first-stage family members".into(),
            estimate: census.count.to_u128().unwrap_or(u128::MAX),
            cap: opts.member_cap as u128,
        });
    }
    Ok(census.pairs().into_iter().map(|(f, a)| (a, f)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CoverageMode {
    /// `A ⊆ C1 ∩ C2` and `(A+A)^c ⊆ C0`.
    Symmetric,
    /// `A ⊆ C1`, `B ⊆ C2`, `(A+B)^c ⊆ C0`.
    Pair,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub total: usize,
    pub covered: usize,
    pub first_uncovered: Option<Member>,
}

impl CoverageReport {
    pub fn complete(&self) -> bool {
        self.covered == self.total
    }
}

pub fn verify_coverage(
    ground: &GroundSet,
    collection: &[ContainerTriple],
    census: &FamilyCensus,
    mode: CoverageMode,
) -> CoverageReport {
    let pairs = census.pairs();
    let hits: Vec<bool> = pairs
        .par_iter()
        .map(|(a, b)| {
            let b = if mode == CoverageMode::Symmetric { a } else { b };
            let outside = ground.sumset_unchecked(a, b).complement();
            collection.iter().any(|t| a.is_subset_of(&t.c1) && b.is_subset_of(&t.c2) && outside.is_subset_of(&t.c0))
        })
        .collect();
    let first_uncovered = hits.iter().position(|h| !h).map(|i| census.members[i].clone());
    CoverageReport { total: pairs.len(), covered: hits.iter().filter(|h| **h).count(), first_uncovered }
}

/// Every set lies in some single-set container.
pub fn verify_set_coverage(sets: &[IndexSet], containers: &[IndexSet]) -> CoverageReport {
    let hits: Vec<bool> = sets.par_iter().map(|a| containers.iter().any(|c| a.is_subset_of(c))).collect();
    let first_uncovered = hits.iter().position(|h| !h).map(|i| Member::Set(sets[i].clone()));
    CoverageReport { total: sets.len(), covered: hits.iter().filter(|h| **h).count(), first_uncovered }
}

/// Symmetric: `Σ binom(|C1 ∩ C2|, s)`; asymmetric: `Σ binom(|C1|, s) binom(|C2|, s')`.
pub fn bound_from_collection(collection: &[ContainerTriple], s: usize, s2: Option<usize>) -> BigUint {
    collection
        .iter()
        .map(|t| match s2 {
            None => binomial(t.c1.intersection_count(&t.c2) as u64, s as u64),
            Some(s2) => binomial(t.c1.count() as u64, s as u64) * binomial(t.c2.count() as u64, s2 as u64),
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(g: &GroundSet, m: usize, s: usize) -> u64 {
        census_symmetric(g, m, s, &EnumOptions::default()).unwrap().count.to_u64().unwrap()
    }

    /// Plain bitmask enumeration of all pairs, independent of the DFS.
    fn brute_pairs(g: &GroundSet, m: usize, keep: impl Fn(usize, usize) -> bool) -> u64 {
        let n = g.n();
        let mut c = 0;
        for x in 0u32..(1 << n) {
            for y in 0u32..(1 << n) {
                let (a, b) = (mask(g, x), mask(g, y));
                if keep(a.count(), b.count()) && g.sumset(&a, &b).unwrap().count() <= m {
                    c += 1;
                }
            }
        }
        c
    }

    fn mask(g: &GroundSet, x: u32) -> IndexSet {
        g.y_from_indices((0..g.n()).filter(|i| x >> i & 1 == 1))
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(3, 4), BigUint::zero());
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
    }

    #[test]
    fn symmetric_examples() {
        assert_eq!(sym(&GroundSet::interval(1, 3).unwrap(), 3, 2), 3);
        assert_eq!(sym(&GroundSet::interval(1, 4).unwrap(), 5, 3), 2);
        assert_eq!(sym(&GroundSet::interval(1, 4).unwrap(), 0, 0), 1);
    }

    #[test]
    fn symmetric_matches_bitmask_scan() {
        let g = GroundSet::interval(1, 10).unwrap();
        for m in 0..14 {
            for s in 0..6 {
                let direct = (0u32..1 << 10)
                    .filter(|x| x.count_ones() as usize == s)
                    .filter(|x| {
                        let a = mask(&g, *x);
                        g.sumset(&a, &a).unwrap().count() <= m
                    })
                    .count() as u64;
                assert_eq!(sym(&g, m, s), direct, "m={m} s={s}");
            }
        }
    }

    #[test]
    fn unrefined_examples() {
        let g = GroundSet::interval(1, 2).unwrap();
        let c = census_unrefined(&g, 1, &EnumOptions::default()).unwrap();
        assert_eq!(c.count, BigUint::from(3u32));
        assert_eq!(c.members.len(), 3);
        let g = GroundSet::interval(1, 5).unwrap();
        assert_eq!(census_unrefined(&g, 9, &EnumOptions::default()).unwrap().count, BigUint::from(32u32));
        let g = GroundSet::interval(7, 7).unwrap();
        assert_eq!(census_unrefined(&g, 1, &EnumOptions::default()).unwrap().count, BigUint::from(2u32));
    }

    #[test]
    fn unrefined_is_sum_of_symmetric() {
        let g = GroundSet::new(crate::group::GroupSpec::Cyclic(11), (0..9).map(|x| crate::group::Element(vec![x])).collect()).unwrap();
        for m in 0..8 {
            let total: u64 = (0..=m.min(9)).map(|s| sym(&g, m, s)).sum();
            assert_eq!(census_unrefined(&g, m, &EnumOptions::default()).unwrap().count.to_u64().unwrap(), total);
        }
    }

    #[test]
    fn asymmetric_examples() {
        let o = EnumOptions::default();
        let g = GroundSet::interval(1, 2).unwrap();
        assert_eq!(census_asymmetric(&g, 2, 1, 1, &o).unwrap().count, BigUint::from(4u32));
        assert_eq!(census_asymmetric(&g, 0, 0, 2, &o).unwrap().count, BigUint::from(1u32));
        let g = GroundSet::interval(1, 3).unwrap();
        let c = census_asymmetric(&g, 3, 1, 2, &o).unwrap();
        assert_eq!(c.count.to_u64().unwrap(), brute_pairs(&g, 3, |a, b| a == 1 && b == 2));
        assert_eq!(c.members.len(), 9);
    }

    #[test]
    fn asym_unrefined_examples() {
        let o = EnumOptions::default();
        let g = GroundSet::interval(1, 2).unwrap();
        let c = census_asym_unrefined(&g, 1, 0, &o).unwrap();
        assert_eq!(c.count, BigUint::from(11u32));
        assert_eq!(c.members.len(), 11);
        assert_eq!(census_asym_unrefined(&g, 1, 1, &o).unwrap().count, BigUint::from(4u32));
        assert_eq!(census_asym_unrefined(&g, 3, 0, &o).unwrap().count, BigUint::from(16u32));
        let g = GroundSet::interval(1, 5).unwrap();
        for m in 0..10 {
            for min in 0..3 {
                let c = census_asym_unrefined(&g, m, min, &o).unwrap();
                assert_eq!(c.count.to_u64().unwrap(), brute_pairs(&g, m, |a, b| a >= min && b >= min), "m={m} min={min}");
            }
        }
    }

    #[test]
    fn cap_refuses_with_estimate() {
        let g = GroundSet::interval(1, 30).unwrap();
        let o = EnumOptions { cost_cap: 1000, ..Default::default() };
        match census_symmetric(&g, 10, 5, &o) {
            Err(Error::CapExceeded { estimate, .. }) => assert_eq!(estimate, 142506),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn member_cap_drops_list_keeps_count() {
        let g = GroundSet::interval(1, 8).unwrap();
        let o = EnumOptions { member_cap: 3, ..Default::default() };
        let c = census_symmetric(&g, 15, 2, &o).unwrap();
        assert_eq!(c.count, BigUint::from(28u32));
        assert!(!c.materialized && c.members.is_empty());
    }

    #[test]
    fn threads_agree() {
        let g = GroundSet::interval(1, 12).unwrap();
        let run = |t| {
            rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(|| census_unrefined(&g, 10, &EnumOptions::default()).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn coverage_and_bound() {
        let g = GroundSet::interval(1, 6).unwrap();
        let c = census_symmetric(&g, 5, 3, &EnumOptions::default()).unwrap();
        let empty = verify_coverage(&g, &[], &c, CoverageMode::Symmetric);
        assert_eq!(empty.covered, 0);
        assert!(empty.first_uncovered.is_some());
        let whole = ContainerTriple { c0: g.full_sums(), c1: g.full_y(), c2: g.full_y() };
        assert!(verify_coverage(&g, &[whole.clone()], &c, CoverageMode::Symmetric).complete());
        assert_eq!(bound_from_collection(&[], 2, None), BigUint::zero());
        let four = ContainerTriple { c0: g.full_sums(), c1: g.y_ints(&[1, 2, 3, 4]).unwrap(), c2: g.full_y() };
        assert_eq!(bound_from_collection(&[four], 2, None), BigUint::from(6u32));
        assert_eq!(bound_from_collection(&[whole], 2, Some(1)), BigUint::from(90u32));
    }

    #[test]
    fn fingerprint_family_matches_scan() {
        let g = GroundSet::interval(1, 7).unwrap();
        let fam = fingerprint_family(&g, 6, 2, 2, &EnumOptions::default()).unwrap();
        let direct = brute_pairs(&g, 6, |a, b| a >= 2 && b == 2);
        assert_eq!(fam.len() as u64, direct);
        assert!(fam.iter().all(|(a, f)| a.count() >= 2 && f.count() == 2));
    }
}
