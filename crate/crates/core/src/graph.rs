//! The bipartite graph `H^F(U0, U1)` and the SUMRISE container algorithm.
//!
//! `a ∈ U1` and `b ∈ U0` are adjacent iff `b - a ∈ F`, i.e. `b = a + f` for some `f ∈ F`.

use crate::error::{domain, precondition, Result};
use crate::group::GroundSet;
use crate::rational::{ge_scaled, Rational};
use crate::set::{IndexSet, Universe};
use serde::Serialize;

/// Whether algorithm preconditions are enforced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub enum Checking {
    #[default]
    Strict,
    Unchecked,
}

/// One loop iteration of SUMRISE or SUNSET.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub vertex: usize,
    /// Membership answer: `u ∈ A` for SUMRISE, `u ∈ B` for SUNSET.
    pub hit: bool,
    /// `|U0|` after the iteration.
    pub u0: usize,
    /// Size of the vertex class being walked (`|U1|` or `|U2|`) after the iteration.
    pub walked: usize,
    /// Vertices of `U0` deleted in this iteration.
    pub removed: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    /// `iter,vertex,in_set,|U0|,|U|` per line.
    pub fn to_lines(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| format!("{},{},{},{},{}", r.iter, r.vertex, r.hit as u8, r.u0, r.walked))
            .collect()
    }
}

/// `H^F(U0, U1)` with degrees of `U1` kept current under deletions.
#[derive(Clone, Debug)]
pub struct BipartiteView<'g> {
    ground: &'g GroundSet,
    f: IndexSet,
    u0: IndexSet,
    u1: IndexSet,
    degree: Vec<u32>,
}

impl<'g> BipartiteView<'g> {
    pub fn new(ground: &'g GroundSet, f: &IndexSet, u0: &IndexSet, u1: &IndexSet) -> Result<Self> {
        check_universe(ground, f, Universe::Ground, "F")?;
        check_universe(ground, u0, Universe::Sums, "U0")?;
        check_universe(ground, u1, Universe::Ground, "U1")?;
        let mut view = BipartiteView { ground, f: f.clone(), u0: u0.clone(), u1: u1.clone(), degree: vec![0; ground.n()] };
        for a in u1.iter() {
            view.degree[a] = view.naive_degree(a) as u32;
        }
        Ok(view)
    }

    pub fn u0(&self) -> &IndexSet {
        &self.u0
    }

    pub fn u1(&self) -> &IndexSet {
        &self.u1
    }

    pub fn f(&self) -> &IndexSet {
        &self.f
    }

    /// Maintained degree of `a ∈ U1`.
    pub fn degree(&self, a: usize) -> usize {
        self.degree[a] as usize
    }

    /// Degree of `a` recounted from scratch.
    pub fn naive_degree(&self, a: usize) -> usize {
        self.f.iter().filter(|&f| self.u0.contains(self.ground.sum_index(a, f))).count()
    }

    pub fn edge_count(&self) -> usize {
        self.u1.iter().map(|a| self.degree[a] as usize).sum()
    }

    /// Neighbourhood of `a` in `U0`.
    pub fn neighbourhood(&self, a: usize) -> IndexSet {
        let mut out = self.ground.empty_sums();
        for f in self.f.iter() {
            let b = self.ground.sum_index(a, f);
            if self.u0.contains(b) {
                out.insert(b);
            }
        }
        out
    }

    pub fn remove_from_u1(&mut self, a: usize) {
        self.u1.remove(a);
    }

    /// Deletes `N(a)` from `U0` and returns how many vertices went.
    pub fn remove_neighbourhood(&mut self, a: usize) -> usize {
        let mut removed = 0;
        for f in self.f.iter() {
            let b = self.ground.sum_index(a, f);
            if self.u0.remove(b) {
                removed += 1;
                for &(x, y) in self.ground.preimages(b) {
                    if self.f.contains(y as usize) && self.u1.contains(x as usize) {
                        self.degree[x as usize] -= 1;
                    }
                }
            }
        }
        removed
    }
}

pub(crate) fn check_universe(ground: &GroundSet, s: &IndexSet, universe: Universe, name: &str) -> Result<()> {
    let len = match universe {
        Universe::Ground => ground.n(),
        Universe::Sums => ground.sums().len(),
    };
    if s.universe() != universe || s.universe_len() != len {
        return Err(domain(format!("{name} is over the wrong universe")));
    }
    Ok(())
}

/// Max-degree vertex of `U1`, ties to the smallest index.
pub fn sigma_select(view: &BipartiteView) -> Result<usize> {
    let mut best: Option<(usize, usize)> = None;
    for a in view.u1.iter() {
        let d = view.degree(a);
        if best.map_or(true, |(_, bd)| d > bd) {
            best = Some((a, d));
        }
    }
    best.map(|(a, _)| a).ok_or_else(|| domain("sigma_select on empty U1"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SumriseOutput {
    pub s: IndexSet,
    pub c0: IndexSet,
    pub c1: IndexSet,
    pub trace: RunTrace,
}

/// Algorithm SUMRISE(s, A, F) on `H^F(U0, U1)`.
pub fn sumrise(
    ground: &GroundSet,
    s: usize,
    a: &IndexSet,
    f: &IndexSet,
    u0: &IndexSet,
    u1: &IndexSet,
    checking: Checking,
) -> Result<SumriseOutput> {
    check_universe(ground, a, Universe::Ground, "A")?;
    let mut view = BipartiteView::new(ground, f, u0, u1)?;
    if checking == Checking::Strict {
        if s == 0 {
            return Err(precondition("s must be at least 1"));
        }
        if f.is_empty() {
            return Err(precondition("|F| >= 1 fails: F is empty"));
        }
        if !a.is_subset_of(u1) {
            return Err(precondition("A ⊆ U1 fails"));
        }
        if a.count() < s {
            return Err(precondition(format!("|A| >= s fails: |A| = {}, s = {s}", a.count())));
        }
        if !ground.sumset_unchecked(a, f).complement().is_subset_of(u0) {
            return Err(precondition("(A+F)^c ⊆ U0 fails"));
        }
    }
    let mut chosen = ground.empty_y();
    let mut trace = RunTrace::default();
    let mut iter = 0;
    while chosen.count() < s {
        if view.u1.is_empty() {
            return Err(precondition(format!("U1 exhausted after selecting {} of s = {s} vertices", chosen.count())));
        }
        let u = sigma_select(&view)?;
        let hit = a.contains(u);
        let mut removed = 0;
        if hit {
            chosen.insert(u);
            removed = view.remove_neighbourhood(u);
        }
        view.remove_from_u1(u);
        trace.records.push(TraceRecord { iter, vertex: u, hit, u0: view.u0.count(), walked: view.u1.count(), removed });
        iter += 1;
    }
    Ok(SumriseOutput { s: chosen, c0: view.u0, c1: view.u1, trace })
}

/// `|S| + |C1| <= (1+δ) m`; `None` when the size-bound hypotheses are not met.
pub fn size_bound_holds(
    out: &SumriseOutput,
    a_f_sumset: usize,
    f_len: usize,
    s: usize,
    lambda: usize,
    m: usize,
    delta: &Rational,
) -> Option<bool> {
    let one_plus = Rational::from_integer(1) + delta;
    let m_r = Rational::from_integer(m as i128);
    let regime = *delta * Rational::from_integer((lambda * s) as i128) >= one_plus * m_r
        && f_len >= lambda
        && out.s.count() == s
        && a_f_sumset <= m;
    if !regime {
        return None;
    }
    let total = Rational::from_integer((out.s.count() + out.c1.count()) as i128);
    Some(total <= one_plus * m_r)
}

/// Shrinking alternative: `|C0| <= |U0| - δm/6` or `|S|+|C1| <= (1-δ/6)|U1|`;
/// `None` outside the regime `λs >= m`, `|U1| >= m/4`, `e(H^F(U0,U1)) >= δ|F||U1|`, `|A+F| <= m`, `|F| >= λ`.
#[allow(clippy::too_many_arguments)]
pub fn shrinking_holds(
    out: &SumriseOutput,
    u0_len: usize,
    u1_len: usize,
    edges: usize,
    a_f_sumset: usize,
    f_len: usize,
    s: usize,
    lambda: usize,
    m: usize,
    delta: &Rational,
) -> Option<bool> {
    let regime = lambda * s >= m
        && 4 * u1_len >= m
        && ge_scaled(edges as i128, delta, (f_len * u1_len) as i128)
        && a_f_sumset <= m
        && f_len >= lambda;
    if !regime {
        return None;
    }
    Some(shrink_alternative(out.c0.count(), u0_len, out.s.count() + out.c1.count(), u1_len, m, delta) != Shrink::Neither)
}

/// Which of the two shrinking alternatives holds (first one wins).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Shrink {
    Zero,
    One,
    Neither,
}

pub fn shrink_alternative(d0: usize, u0: usize, d1: usize, u1: usize, m: usize, delta: &Rational) -> Shrink {
    // |D0| <= |U0| - δm/6  <=>  6(|U0| - |D0|) >= δ m
    if d0 <= u0 && ge_scaled(6 * (u0 - d0) as i128, delta, m as i128) {
        return Shrink::Zero;
    }
    // |D1| <= (1 - δ/6)|U1|  <=>  6|D1| <= (6 - δ)|U1|
    let lhs = Rational::from_integer(6 * d1 as i128);
    let rhs = (Rational::from_integer(6) - delta) * Rational::from_integer(u1 as i128);
    if lhs <= rhs {
        Shrink::One
    } else {
        Shrink::Neither
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> GroundSet {
        GroundSet::interval(1, 4).unwrap()
    }

    #[test]
    fn sigma_picks_smallest_on_ties() {
        let g = setup();
        let f = g.y_ints(&[1, 2]).unwrap();
        let u0 = g.sums_ints(&[2, 3, 4, 5, 6, 7, 8]).unwrap();
        let v = BipartiteView::new(&g, &f, &u0, &g.full_y()).unwrap();
        for a in 0..4 {
            assert_eq!(v.degree(a), 2);
        }
        assert_eq!(g.element(sigma_select(&v).unwrap()).0[0], 1);

        let single = g.y_ints(&[4]).unwrap();
        let v = BipartiteView::new(&g, &f, &g.empty_sums(), &single).unwrap();
        assert_eq!(sigma_select(&v).unwrap(), 3);

        let v = BipartiteView::new(&g, &g.empty_y(), &u0, &g.full_y()).unwrap();
        assert_eq!(sigma_select(&v).unwrap(), 0);

        let v = BipartiteView::new(&g, &f, &u0, &g.empty_y()).unwrap();
        assert!(sigma_select(&v).is_err());
    }

    #[test]
    fn sumrise_hand_trace() {
        let g = setup();
        let f = g.y_ints(&[1, 2]).unwrap();
        let a = g.y_ints(&[1, 2, 3]).unwrap();
        let u0 = g.sums_ints(&[2, 3, 4, 5, 6, 7, 8]).unwrap();
        let out = sumrise(&g, 1, &a, &f, &u0, &g.full_y(), Checking::Strict).unwrap();
        assert_eq!(g.ints(&out.s), vec![1]);
        assert_eq!(g.ints(&out.c0), vec![4, 5, 6, 7, 8]);
        assert_eq!(g.ints(&out.c1), vec![2, 3, 4]);
        assert_eq!(out.trace.to_lines(), vec!["0,0,1,5,3"]);
        let again = sumrise(&g, 1, &a, &f, &u0, &g.full_y(), Checking::Strict).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn sumrise_full_selection() {
        let g = setup();
        let f = g.y_ints(&[2]).unwrap();
        let a = g.full_y();
        let out = sumrise(&g, 4, &a, &f, &g.full_sums(), &a, Checking::Strict).unwrap();
        assert_eq!(out.s, a);
        assert!(out.c1.is_empty());
    }

    #[test]
    fn sumrise_preconditions() {
        let g = setup();
        let f = g.y_ints(&[1, 2]).unwrap();
        let a = g.y_ints(&[1, 2, 3]).unwrap();
        let small_u0 = g.sums_ints(&[8]).unwrap();
        let err = sumrise(&g, 1, &a, &f, &small_u0, &g.full_y(), Checking::Strict).unwrap_err();
        assert!(err.to_string().contains("(A+F)^c"));
        let err = sumrise(&g, 4, &a, &f, &g.full_sums(), &g.full_y(), Checking::Strict).unwrap_err();
        assert!(err.to_string().contains("|A| >= s"));
        let err = sumrise(&g, 1, &a, &f, &g.full_sums(), &g.y_ints(&[1]).unwrap(), Checking::Strict).unwrap_err();
        assert!(err.to_string().contains("A ⊆ U1"));
        assert!(sumrise(&g, 1, &a, &g.empty_y(), &g.full_sums(), &g.full_y(), Checking::Strict).is_err());
    }

    #[test]
    fn incremental_degrees_match_recount() {
        let g = GroundSet::integers(&[0, 1, 3, 4, 7, 9, 10]).unwrap();
        let f = g.y_ints(&[0, 3, 9]).unwrap();
        let mut v = BipartiteView::new(&g, &f, &g.full_sums(), &g.full_y()).unwrap();
        for u in [2usize, 5, 0] {
            v.remove_neighbourhood(u);
            v.remove_from_u1(u);
            for a in v.u1().iter() {
                assert_eq!(v.degree(a), v.naive_degree(a));
            }
        }
    }

    #[test]
    fn shrink_alternative_thresholds() {
        let d = Rational::new(3, 5);
        // 6 * 1 >= 0.6 * 10
        assert_eq!(shrink_alternative(9, 10, 10, 10, 10, &d), Shrink::Zero);
        // 6 * 9 <= 5.4 * 10
        assert_eq!(shrink_alternative(10, 10, 9, 10, 10, &d), Shrink::One);
        assert_eq!(shrink_alternative(10, 10, 10, 10, 10, &d), Shrink::Neither);
    }
}
