//! Ambient abelian groups, ground sets `Y`, the sum universe `Y+Y`, and subgroups.

use crate::error::{domain, Error, Result};
use crate::set::{IndexSet, Universe};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Refuse subgroup enumeration above this group order unless overridden.
pub const DEFAULT_GROUP_CAP: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GroupSpec {
    /// The integers, no modular reduction.
    Integers,
    /// Z_q.
    Cyclic(u64),
    /// Z_{q1} x Z_{q2} x ...
    Product(Vec<u64>),
}

impl GroupSpec {
    /// Parses `Z`, `Zmod:q` or `prod:q1,q2,...`.
    pub fn parse(text: &str) -> Result<GroupSpec> {
        let t = text.trim();
        let parse_mod = |s: &str| -> Result<u64> {
            let q: u64 = s.trim().parse().map_err(|_| domain(format!("bad modulus '{s}'")))?;
            if q == 0 {
                return Err(domain("modulus must be at least 1"));
            }
            Ok(q)
        };
        if t == "Z" {
            Ok(GroupSpec::Integers)
        } else if let Some(q) = t.strip_prefix("Zmod:") {
            Ok(GroupSpec::Cyclic(parse_mod(q)?))
        } else if let Some(qs) = t.strip_prefix("prod:") {
            let moduli = qs.split(',').map(parse_mod).collect::<Result<Vec<_>>>()?;
            if moduli.is_empty() {
                return Err(domain("product needs at least one factor"));
            }
            Ok(GroupSpec::Product(moduli))
        } else {
            Err(domain(format!("unknown group '{t}' (expected Z, Zmod:q or prod:q1,q2,...)")))
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GroupSpec::Integers | GroupSpec::Cyclic(_) => 1,
            GroupSpec::Product(qs) => qs.len(),
        }
    }

    /// Moduli per coordinate; `None` for the integers.
    pub fn moduli(&self) -> Option<Vec<u64>> {
        match self {
            GroupSpec::Integers => None,
            GroupSpec::Cyclic(q) => Some(vec![*q]),
            GroupSpec::Product(qs) => Some(qs.clone()),
        }
    }

    /// Group order, `None` for the integers or on overflow.
    pub fn order(&self) -> Option<u64> {
        self.moduli()?.iter().try_fold(1u64, |acc, &q| acc.checked_mul(q))
    }

    pub fn zero(&self) -> Element {
        Element(vec![0; self.arity()])
    }

    pub fn validate(&self, e: &Element) -> Result<()> {
        if e.0.len() != self.arity() {
            return Err(domain(format!("element {e} has {} coordinates, group needs {}", e.0.len(), self.arity())));
        }
        if let Some(qs) = self.moduli() {
            for (&c, &q) in e.0.iter().zip(&qs) {
                if c < 0 || c as u64 >= q {
                    return Err(domain(format!("coordinate {c} of {e} out of range for modulus {q}")));
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        match self.moduli() {
            None => {
                let x = a.0[0].checked_add(b.0[0]).ok_or_else(|| domain("integer overflow in group addition"))?;
                Ok(Element(vec![x]))
            }
            Some(qs) => Ok(Element(
                a.0.iter().zip(&b.0).zip(&qs).map(|((&x, &y), &q)| ((x as i128 + y as i128) % q as i128) as i64).collect(),
            )),
        }
    }

    pub fn neg(&self, a: &Element) -> Result<Element> {
        match self.moduli() {
            None => Ok(Element(vec![a.0[0].checked_neg().ok_or_else(|| domain("integer overflow in negation"))?])),
            Some(qs) => Ok(Element(a.0.iter().zip(&qs).map(|(&x, &q)| (q as i64 - x) % q as i64).collect())),
        }
    }

    /// Every element of a finite group in mixed-radix order.
    pub fn all_elements(&self) -> Result<Vec<Element>> {
        let qs = self.moduli().ok_or_else(|| domain("the integers have no finite element list"))?;
        let order = self.order().ok_or_else(|| domain("group order overflows"))?;
        let mut out = Vec::with_capacity(order as usize);
        for mut r in 0..order {
            let mut coords = vec![0i64; qs.len()];
            for k in (0..qs.len()).rev() {
                coords[k] = (r % qs[k]) as i64;
                r /= qs[k];
            }
            out.push(Element(coords));
        }
        Ok(out)
    }

    /// Parses one element: an integer, or `c1/c2/...` for products.
    pub fn parse_element(&self, text: &str) -> Result<Element> {
        let coords = text
            .trim()
            .split('/')
            .map(|c| c.trim().parse::<i64>().map_err(|_| domain(format!("bad element '{text}'"))))
            .collect::<Result<Vec<_>>>()?;
        let e = Element(coords);
        self.validate(&e)?;
        Ok(e)
    }

    /// Parses a ground-set description: `interval:a..b`, `all`, or a comma list.
    pub fn parse_ground(&self, text: &str) -> Result<Vec<Element>> {
        let t = text.trim();
        if let Some(range) = t.strip_prefix("interval:") {
            if self.arity() != 1 {
                return Err(domain("intervals need a one-coordinate group"));
            }
            let (a, b) = range.split_once("..").ok_or_else(|| domain(format!("bad interval '{t}'")))?;
            let a: i64 = a.trim().parse().map_err(|_| domain(format!("bad interval '{t}'")))?;
            let b: i64 = b.trim().parse().map_err(|_| domain(format!("bad interval '{t}'")))?;
            if b < a {
                return Err(domain(format!("empty interval '{t}'")));
            }
            (a..=b).map(|x| self.parse_element(&x.to_string())).collect()
        } else if t == "all" {
            self.all_elements()
        } else {
            t.split(',').map(|e| self.parse_element(e)).collect()
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Integers => write!(f, "Z"),
            GroupSpec::Cyclic(q) => write!(f, "Zmod:{q}"),
            GroupSpec::Product(qs) => {
                write!(f, "prod:{}", qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","))
            }
        }
    }
}

/// A group element as its coordinate vector (a single integer for `Z` and `Z_q`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(pub Vec<i64>);

impl Element {
    pub fn int(x: i64) -> Element {
        Element(vec![x])
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join("/"))
    }
}

impl Serialize for Element {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.len() == 1 {
            s.serialize_i64(self.0[0])
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

/// The distinct elements of `Y+Y`, ordered by first appearance in a row-major scan of `Y x Y`.
#[derive(Clone, Debug)]
pub struct SumUniverse {
    elements: Vec<Element>,
    index: HashMap<Element, usize>,
}

impl SumUniverse {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.index.get(e).copied()
    }
}

/// An ordered subset `Y` of an abelian group together with its addition table into `Y+Y`.
#[derive(Clone, Debug)]
pub struct GroundSet {
    spec: GroupSpec,
    elements: Vec<Element>,
    index: HashMap<Element, usize>,
    sums: SumUniverse,
    add: Vec<u32>,
    preimages: Vec<Vec<(u32, u32)>>,
}

impl GroundSet {
    pub fn new(spec: GroupSpec, elements: Vec<Element>) -> Result<GroundSet> {
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            spec.validate(e)?;
            if index.insert(e.clone(), i).is_some() {
                return Err(domain(format!("duplicate element {e} in ground set")));
            }
        }
        let n = elements.len();
        let mut sum_elements = Vec::new();
        let mut sum_index: HashMap<Element, usize> = HashMap::new();
        let mut add = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let s = spec.add(&elements[i], &elements[j])?;
                let next = sum_elements.len();
                let k = *sum_index.entry(s.clone()).or_insert_with(|| {
                    sum_elements.push(s);
                    next
                });
                add[i * n + j] = k as u32;
            }
        }
        let mut preimages = vec![Vec::new(); sum_elements.len()];
        for i in 0..n {
            for j in 0..n {
                preimages[add[i * n + j] as usize].push((i as u32, j as u32));
            }
        }
        Ok(GroundSet {
            spec,
            elements,
            index,
            sums: SumUniverse { elements: sum_elements, index: sum_index },
            add,
            preimages,
        })
    }

    /// `[a..=b]` inside the integers.
    pub fn interval(a: i64, b: i64) -> Result<GroundSet> {
        GroundSet::new(GroupSpec::Integers, (a..=b).map(Element::int).collect())
    }

    /// Integer ground set from explicit values.
    pub fn integers(values: &[i64]) -> Result<GroundSet> {
        GroundSet::new(GroupSpec::Integers, values.iter().copied().map(Element::int).collect())
    }

    /// All of a finite group.
    pub fn whole(spec: GroupSpec) -> Result<GroundSet> {
        let elements = spec.all_elements()?;
        GroundSet::new(spec, elements)
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn sums(&self) -> &SumUniverse {
        &self.sums
    }

    /// Index in `Y+Y` of `y_i + y_j`.
    #[inline]
    pub fn sum_index(&self, i: usize, j: usize) -> usize {
        self.add[i * self.elements.len() + j] as usize
    }

    /// All `(i, j)` with `y_i + y_j` equal to the sum element `k`.
    pub fn preimages(&self, k: usize) -> &[(u32, u32)] {
        &self.preimages[k]
    }

    pub fn empty_y(&self) -> IndexSet {
        IndexSet::empty(Universe::Ground, self.n())
    }

    pub fn full_y(&self) -> IndexSet {
        IndexSet::full(Universe::Ground, self.n())
    }

    pub fn empty_sums(&self) -> IndexSet {
        IndexSet::empty(Universe::Sums, self.sums.len())
    }

    pub fn full_sums(&self) -> IndexSet {
        IndexSet::full(Universe::Sums, self.sums.len())
    }

    pub fn y_from_indices(&self, idx: impl IntoIterator<Item = usize>) -> IndexSet {
        IndexSet::from_indices(Universe::Ground, self.n(), idx)
    }

    pub fn sums_from_indices(&self, idx: impl IntoIterator<Item = usize>) -> IndexSet {
        IndexSet::from_indices(Universe::Sums, self.sums.len(), idx)
    }

    /// Subset of `Y` from element values; errors if a value is not in `Y`.
    pub fn y_set(&self, values: &[Element]) -> Result<IndexSet> {
        let mut s = self.empty_y();
        for v in values {
            let i = self.index_of(v).ok_or_else(|| domain(format!("{v} is not in the ground set")))?;
            s.insert(i);
        }
        Ok(s)
    }

    /// Subset of `Y` from integer values (one-coordinate groups).
    pub fn y_ints(&self, values: &[i64]) -> Result<IndexSet> {
        self.y_set(&values.iter().copied().map(Element::int).collect::<Vec<_>>())
    }

    /// Subset of `Y+Y` from element values.
    pub fn sums_set(&self, values: &[Element]) -> Result<IndexSet> {
        let mut s = self.empty_sums();
        for v in values {
            let i = self.sums.index_of(v).ok_or_else(|| domain(format!("{v} is not in Y+Y")))?;
            s.insert(i);
        }
        Ok(s)
    }

    pub fn sums_ints(&self, values: &[i64]) -> Result<IndexSet> {
        self.sums_set(&values.iter().copied().map(Element::int).collect::<Vec<_>>())
    }

    /// Element values of an index set, in index order.
    pub fn values(&self, set: &IndexSet) -> Vec<Element> {
        let pool = match set.universe() {
            Universe::Ground => &self.elements,
            Universe::Sums => &self.sums.elements,
        };
        set.iter().map(|i| pool[i].clone()).collect()
    }

    /// Integer values of an index set (first coordinate).
    pub fn ints(&self, set: &IndexSet) -> Vec<i64> {
        self.values(set).into_iter().map(|e| e.0[0]).collect()
    }

    /// `{y : y in set}` rendered as `{a,b,c}`.
    pub fn render(&self, set: &IndexSet) -> String {
        let parts: Vec<String> = self.values(set).iter().map(|e| e.to_string()).collect();
        format!("{{{}}}", parts.join(","))
    }

    fn check_y(&self, s: &IndexSet) -> Result<()> {
        if s.universe() != Universe::Ground || s.universe_len() != self.n() {
            return Err(domain("index set is not a subset of this ground set"));
        }
        Ok(())
    }

    /// `A + B` as a subset of `Y+Y`.
    pub fn sumset(&self, a: &IndexSet, b: &IndexSet) -> Result<IndexSet> {
        self.check_y(a)?;
        self.check_y(b)?;
        Ok(self.sumset_unchecked(a, b))
    }

    pub(crate) fn sumset_unchecked(&self, a: &IndexSet, b: &IndexSet) -> IndexSet {
        let mut out = self.empty_sums();
        for i in a.iter() {
            for j in b.iter() {
                out.insert(self.sum_index(i, j));
            }
        }
        out
    }

    /// `(Y+Y) \ (A+B)`.
    pub fn sumset_complement(&self, a: &IndexSet, b: &IndexSet) -> Result<IndexSet> {
        Ok(self.sumset(a, b)?.complement())
    }
}

/// All subgroups of a finite group, each as a sorted element list, ordered by (size, elements).
pub fn enumerate_subgroups(spec: &GroupSpec) -> Result<Vec<Vec<Element>>> {
    enumerate_subgroups_capped(spec, DEFAULT_GROUP_CAP)
}

pub fn enumerate_subgroups_capped(spec: &GroupSpec, cap: u64) -> Result<Vec<Vec<Element>>> {
    let Some(order) = spec.order() else {
        return match spec {
            GroupSpec::Integers => Ok(vec![vec![spec.zero()]]),
            _ => Err(domain("group order overflows")),
        };
    };
    if order > cap {
        return Err(Error::CapExceeded { what: format!("subgroup enumeration of {spec}"), estimate: order as u128, cap: cap as u128 });
    }
    let elements = spec.all_elements()?;
    let index: HashMap<&Element, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let order = order as usize;
    let add = |i: usize, j: usize| -> usize { index[&spec.add(&elements[i], &elements[j]).expect("finite addition")] };

    // Each subgroup is reached from a smaller one by adjoining one element.
    let trivial: Vec<usize> = vec![index[&spec.zero()]];
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    found.insert(trivial.clone());
    let mut frontier = vec![trivial];
    while let Some(h) = frontier.pop() {
        let mut in_h = vec![false; order];
        for &x in &h {
            in_h[x] = true;
        }
        let mut seen_coset = vec![false; order];
        for g in 0..order {
            if in_h[g] || seen_coset[g] {
                continue;
            }
            for &x in &h {
                seen_coset[add(x, g)] = true;
            }
            // <H, g> = union of H + k g until k g lands in H.
            let mut k_set = h.clone();
            let mut member = in_h.clone();
            let mut kg = g;
            while !in_h[kg] {
                for &x in &h {
                    let y = add(x, kg);
                    if !member[y] {
                        member[y] = true;
                        k_set.push(y);
                    }
                }
                kg = add(kg, g);
            }
            k_set.sort_unstable();
            if found.insert(k_set.clone()) {
                frontier.push(k_set);
            }
        }
    }
    let mut out: Vec<Vec<Element>> = found
        .into_iter()
        .map(|h| {
            let mut v: Vec<Element> = h.into_iter().map(|i| elements[i].clone()).collect();
            v.sort();
            v
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Size of the largest subgroup with at most `m` elements.
pub fn beta(spec: &GroupSpec, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(domain("beta needs m >= 1"));
    }
    match spec {
        GroupSpec::Integers => Ok(1),
        GroupSpec::Cyclic(q) => {
            let q = *q;
            Ok((1..=q.min(m)).rev().find(|d| q % d == 0).unwrap_or(1))
        }
        GroupSpec::Product(_) => Ok(enumerate_subgroups(spec)?
            .iter()
            .map(|h| h.len() as u64)
            .filter(|&s| s <= m)
            .max()
            .unwrap_or(1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_ground_set_is_closed() {
        let g = GroundSet::whole(GroupSpec::Cyclic(5)).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.sums().len(), 5);
    }

    #[test]
    fn integer_interval_sum_universe() {
        let g = GroundSet::integers(&[1, 2, 3]).unwrap();
        let sums: Vec<i64> = g.sums().elements().iter().map(|e| e.0[0]).collect();
        assert_eq!(sums, vec![2, 3, 4, 5, 6]);
    }

    #[test]
    fn duplicate_and_range_errors() {
        assert!(GroundSet::integers(&[1, 1, 2]).is_err());
        assert!(GroundSet::new(GroupSpec::Cyclic(5), vec![Element::int(5)]).is_err());
        assert!(GroundSet::new(GroupSpec::Product(vec![2, 3]), vec![Element(vec![1, 3])]).is_err());
    }

    #[test]
    fn sum_universe_first_appearance_order() {
        let g = GroundSet::integers(&[3, 1, 2]).unwrap();
        let sums: Vec<i64> = g.sums().elements().iter().map(|e| e.0[0]).collect();
        assert_eq!(sums, vec![6, 4, 5, 2, 3]);
    }

    #[test]
    fn sumset_examples() {
        let g = GroundSet::interval(1, 4).unwrap();
        let a = g.y_ints(&[1, 2, 3]).unwrap();
        assert_eq!(g.ints(&g.sumset(&a, &a).unwrap()), vec![2, 3, 4, 5, 6]);
        assert!(g.sumset(&g.empty_y(), &a).unwrap().is_empty());

        let g = GroundSet::interval(0, 5).unwrap();
        let a = g.y_ints(&[0, 1, 3]).unwrap();
        let b = g.y_ints(&[0, 2]).unwrap();
        let mut s = g.ints(&g.sumset(&a, &b).unwrap());
        s.sort();
        assert_eq!(s, vec![0, 1, 2, 3, 5]);
    }

    #[test]
    fn complement_examples() {
        let g = GroundSet::interval(1, 3).unwrap();
        assert!(g.sumset_complement(&g.full_y(), &g.full_y()).unwrap().is_empty());
        assert_eq!(g.sumset_complement(&g.empty_y(), &g.full_y()).unwrap().count(), 5);
        let a = g.y_ints(&[1, 3]).unwrap();
        assert_eq!(g.ints(&g.sumset_complement(&a, &a).unwrap()), vec![3, 5]);
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let g = GroundSet::interval(1, 3).unwrap();
        let h = GroundSet::interval(1, 4).unwrap();
        assert!(g.sumset(&h.full_y(), &g.full_y()).is_err());
    }

    #[test]
    fn subgroups_of_z12() {
        let subs = enumerate_subgroups(&GroupSpec::Cyclic(12)).unwrap();
        let sizes: Vec<usize> = subs.iter().map(|h| h.len()).collect();
        assert_eq!(sizes, vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(enumerate_subgroups(&GroupSpec::Integers).unwrap(), vec![vec![Element::int(0)]]);
        assert_eq!(enumerate_subgroups(&GroupSpec::Cyclic(1)).unwrap(), vec![vec![Element::int(0)]]);
    }

    #[test]
    fn subgroups_of_z2_squared_and_z2_z4() {
        // Z2 x Z2: trivial, three of order 2, whole.
        assert_eq!(enumerate_subgroups(&GroupSpec::Product(vec![2, 2])).unwrap().len(), 5);
        // Z2 x Z4 has 8 subgroups.
        assert_eq!(enumerate_subgroups(&GroupSpec::Product(vec![2, 4])).unwrap().len(), 8);
    }

    #[test]
    fn subgroups_are_closed() {
        let spec = GroupSpec::Product(vec![2, 6]);
        for h in enumerate_subgroups(&spec).unwrap() {
            let set: BTreeSet<&Element> = h.iter().collect();
            for a in &h {
                assert!(set.contains(&spec.neg(a).unwrap()));
                for b in &h {
                    assert!(set.contains(&spec.add(a, b).unwrap()));
                }
            }
        }
    }

    #[test]
    fn subgroup_cap() {
        let err = enumerate_subgroups(&GroupSpec::Cyclic(5000)).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta(&GroupSpec::Integers, 17).unwrap(), 1);
        assert_eq!(beta(&GroupSpec::Cyclic(12), 7).unwrap(), 6);
        assert_eq!(beta(&GroupSpec::Cyclic(8), 8).unwrap(), 8);
        assert_eq!(beta(&GroupSpec::Product(vec![2, 4]), 3).unwrap(), 2);
    }

    #[test]
    fn beta_cyclic_matches_enumeration() {
        for q in 1..=30u64 {
            let subs = enumerate_subgroups(&GroupSpec::Cyclic(q)).unwrap();
            for m in 1..=q + 2 {
                let brute = subs.iter().map(|h| h.len() as u64).filter(|&s| s <= m).max().unwrap();
                assert_eq!(beta(&GroupSpec::Cyclic(q), m).unwrap(), brute);
            }
        }
    }

    #[test]
    fn spec_and_ground_parsing() {
        assert_eq!(GroupSpec::parse("Zmod:7").unwrap(), GroupSpec::Cyclic(7));
        assert_eq!(GroupSpec::parse("prod:2,3").unwrap(), GroupSpec::Product(vec![2, 3]));
        assert!(GroupSpec::parse("Q").is_err());
        let z = GroupSpec::Integers;
        assert_eq!(z.parse_ground("interval:1..4").unwrap().len(), 4);
        assert_eq!(z.parse_ground("1,5,9").unwrap()[1], Element::int(5));
        let p = GroupSpec::Product(vec![2, 3]);
        assert_eq!(p.parse_ground("all").unwrap().len(), 6);
        assert_eq!(p.parse_ground("1/2,0/1").unwrap()[0], Element(vec![1, 2]));
    }

    #[test]
    fn integer_overflow_is_guarded() {
        assert!(GroundSet::integers(&[i64::MAX, 1]).is_err());
    }
}
