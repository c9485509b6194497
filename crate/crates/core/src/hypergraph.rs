//! The tripartite 3-uniform hypergraph `H(U0, U1, U2)` and the SUNSET algorithm.
//!
//! `a ∈ U1`, `b ∈ U2`, `c ∈ U0` form an edge iff `c = a + b`.

use crate::error::{falsified, precondition, Result};
use crate::graph::{check_universe, sumrise, Checking, RunTrace, SumriseOutput, TraceRecord};
use crate::group::GroundSet;
use crate::rational::{ge_scaled, Rational};
use crate::set::{IndexSet, Universe};
use serde::Serialize;

/// `|{(a, b) ∈ U1 x U2 : a + b ∈ U0}|`.
pub fn hyper_edge_count(ground: &GroundSet, u0: &IndexSet, u1: &IndexSet, u2: &IndexSet) -> usize {
    let mut e = 0;
    for a in u1.iter() {
        for b in u2.iter() {
            if u0.contains(ground.sum_index(a, b)) {
                e += 1;
            }
        }
    }
    e
}

/// Degree of `b` in `H(U0, U1, ·)`; it does not depend on the rest of `U2`.
pub fn hyper_degree(ground: &GroundSet, u0: &IndexSet, u1: &IndexSet, b: usize) -> usize {
    u1.iter().filter(|&a| u0.contains(ground.sum_index(a, b))).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// The density test fired and SUMRISE ran.
    #[serde(rename = "if")]
    Sumrise,
    #[serde(rename = "else")]
    Else,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Sumrise => "if",
            Branch::Else => "else",
        }
    }
}

/// How `U2` degrees are obtained during the selection loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DegreeMode {
    /// Recount every degree at every iteration.
    #[default]
    Recompute,
    /// Count once and walk the resulting order.
    Incremental,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SunsetOutput {
    pub s: IndexSet,
    pub f: IndexSet,
    pub c0: IndexSet,
    pub c1: IndexSet,
    pub c2: IndexSet,
    pub branch: Branch,
    /// Selection loop over `U2`.
    pub trace: RunTrace,
    pub sumrise: Option<SumriseOutput>,
    /// `e(H(U0, U1, C2))` at loop exit.
    pub hyper_edges: usize,
    /// `e(H^F(U0, U1))` at loop exit.
    pub graph_edges: usize,
    /// `(A+F)^c ⊆ U0`, which `F ⊆ B` alone does not guarantee.
    pub sums_outside_in_u0: bool,
}

impl SunsetOutput {
    /// Trace lines with the branch appended as a final field.
    pub fn trace_lines(&self) -> Vec<String> {
        self.trace.to_lines().into_iter().map(|l| format!("{l},{}", self.branch.as_str())).collect()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SunsetOptions {
    pub checking: Checking,
    pub degrees: DegreeMode,
}

/// Algorithm SUNSET_δ(s, λ, A, B) on `H(U0, U1, U2)`.
#[allow(clippy::too_many_arguments)]
pub fn sunset(
    ground: &GroundSet,
    delta: &Rational,
    s: usize,
    lambda: usize,
    a: &IndexSet,
    b: &IndexSet,
    u0: &IndexSet,
    u1: &IndexSet,
    u2: &IndexSet,
    opts: SunsetOptions,
) -> Result<SunsetOutput> {
    check_universe(ground, a, Universe::Ground, "A")?;
    check_universe(ground, b, Universe::Ground, "B")?;
    check_universe(ground, u0, Universe::Sums, "U0")?;
    check_universe(ground, u1, Universe::Ground, "U1")?;
    check_universe(ground, u2, Universe::Ground, "U2")?;
    if opts.checking == Checking::Strict {
        if *delta <= Rational::from_integer(0) {
            return Err(precondition("delta must be positive"));
        }
        if s == 0 || lambda == 0 {
            return Err(precondition("s and lambda must be at least 1"));
        }
        if !a.is_subset_of(u1) {
            return Err(precondition("A ⊆ U1 fails"));
        }
        if !b.is_subset_of(u2) {
            return Err(precondition("B ⊆ U2 fails"));
        }
        if a.count() < s {
            return Err(precondition(format!("|A| >= s fails: |A| = {}, s = {s}", a.count())));
        }
        if b.count() < lambda {
            return Err(precondition(format!("|B| >= lambda fails: |B| = {}, lambda = {lambda}", b.count())));
        }
        if !ground.sumset_unchecked(a, b).complement().is_subset_of(u0) {
            return Err(precondition("(A+B)^c ⊆ U0 fails"));
        }
    }

    let mut f = ground.empty_y();
    let mut walk = u2.clone();
    let mut trace = RunTrace::default();
    let static_order: Vec<usize> = match opts.degrees {
        DegreeMode::Recompute => Vec::new(),
        DegreeMode::Incremental => {
            let mut order: Vec<(usize, usize)> = u2.iter().map(|v| (hyper_degree(ground, u0, u1, v), v)).collect();
            order.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
            order.into_iter().map(|(_, v)| v).collect()
        }
    };
    let mut iter = 0;
    while f.count() < lambda {
        if walk.is_empty() {
            return Err(precondition(format!("U2 exhausted after selecting {} of lambda = {lambda} vertices", f.count())));
        }
        let u = match opts.degrees {
            DegreeMode::Recompute => {
                let mut best: Option<(usize, usize)> = None;
                for v in walk.iter() {
                    let d = hyper_degree(ground, u0, u1, v);
                    if best.map_or(true, |(_, bd)| d > bd) {
                        best = Some((v, d));
                    }
                }
                best.expect("nonempty").0
            }
            DegreeMode::Incremental => static_order[iter],
        };
        let hit = b.contains(u);
        if hit {
            f.insert(u);
        }
        walk.remove(u);
        trace.records.push(TraceRecord { iter, vertex: u, hit, u0: u0.count(), walked: walk.count(), removed: 0 });
        iter += 1;
    }
    let c2 = walk;
    let hyper_edges = hyper_edge_count(ground, u0, u1, &c2);
    let graph_edges = hyper_edge_count(ground, u0, u1, &f);
    let hyper_dense = ge_scaled(hyper_edges as i128, delta, (u1.count() * c2.count()) as i128);
    let graph_dense = ge_scaled(graph_edges as i128, delta, (f.count() * u1.count()) as i128);
    // With C2 empty the hyper test is 0 >= 0 and says nothing about F.
    if hyper_dense && !c2.is_empty() && !graph_dense {
        return Err(falsified(format!(
            "dense hypergraph (e = {hyper_edges}) but e(H^F) = {graph_edges} < δ|F||U1| with δ = {delta}"
        )));
    }
    let sums_outside_in_u0 = ground.sumset_unchecked(a, &f).complement().is_subset_of(u0);
    if hyper_dense || graph_dense {
        // The remaining SUMRISE preconditions follow from the ones checked above.
        let run = sumrise(ground, s, a, &f, u0, u1, Checking::Unchecked)?;
        Ok(SunsetOutput {
            s: run.s.clone(),
            f,
            c0: run.c0.clone(),
            c1: run.c1.clone(),
            c2,
            branch: Branch::Sumrise,
            trace,
            sumrise: Some(run),
            hyper_edges,
            graph_edges,
            sums_outside_in_u0,
        })
    } else {
        Ok(SunsetOutput {
            s: ground.empty_y(),
            f,
            c0: u0.clone(),
            c1: u1.clone(),
            c2,
            branch: Branch::Else,
            trace,
            sumrise: None,
            hyper_edges,
            graph_edges,
            sums_outside_in_u0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_count_examples() {
        let g = GroundSet::interval(1, 4).unwrap();
        assert_eq!(hyper_edge_count(&g, &g.full_sums(), &g.full_y(), &g.full_y()), 16);
        assert_eq!(hyper_edge_count(&g, &g.empty_sums(), &g.full_y(), &g.full_y()), 0);
        let one = g.y_ints(&[1]).unwrap();
        assert_eq!(hyper_edge_count(&g, &g.sums_ints(&[2]).unwrap(), &one, &one), 1);
    }

    #[test]
    fn sunset_hand_trace() {
        let g = GroundSet::interval(1, 4).unwrap();
        let ab = g.y_ints(&[1, 2]).unwrap();
        let delta = Rational::new(9, 10);
        let out = sunset(&g, &delta, 1, 1, &ab, &ab, &g.full_sums(), &g.full_y(), &g.full_y(), SunsetOptions::default()).unwrap();
        assert_eq!(g.ints(&out.f), vec![1]);
        assert_eq!(g.ints(&out.c2), vec![2, 3, 4]);
        assert_eq!(out.hyper_edges, 12);
        assert_eq!(out.branch, Branch::Sumrise);
        assert_eq!(g.ints(&out.s), vec![1]);
        assert_eq!(g.ints(&out.c1), vec![2, 3, 4]);
        let mut c0 = g.ints(&out.c0);
        c0.sort();
        assert_eq!(c0, vec![3, 4, 5, 6, 7, 8]);
        assert_eq!(out.trace_lines(), vec!["0,0,1,7,3,if"]);
    }

    #[test]
    fn sunset_else_branch_on_sparse_instance() {
        // U0 holds only the sums of A+B, so almost no edges remain.
        let g = GroundSet::interval(1, 6).unwrap();
        let a = g.y_ints(&[1, 2]).unwrap();
        let sparse_u0 = g.sumset_complement(&a, &a).unwrap();
        let delta = Rational::from_integer(1);
        let out = sunset(&g, &delta, 1, 1, &a, &a, &sparse_u0, &a, &a, SunsetOptions::default()).unwrap();
        assert_eq!(out.branch, Branch::Else);
        assert!(out.s.is_empty());
        assert_eq!(out.c0, sparse_u0);
        assert_eq!(out.c1, a);
    }

    #[test]
    fn degree_modes_agree() {
        let g = GroundSet::integers(&[0, 1, 2, 4, 5, 8, 9]).unwrap();
        let a = g.y_ints(&[0, 1, 2]).unwrap();
        let b = g.y_ints(&[1, 4, 5]).unwrap();
        for num in 1..8 {
            let d = Rational::new(num, 8);
            let r = sunset(&g, &d, 2, 2, &a, &b, &g.full_sums(), &g.full_y(), &g.full_y(), SunsetOptions::default()).unwrap();
            let i = sunset(
                &g,
                &d,
                2,
                2,
                &a,
                &b,
                &g.full_sums(),
                &g.full_y(),
                &g.full_y(),
                SunsetOptions { checking: Checking::Strict, degrees: DegreeMode::Incremental },
            )
            .unwrap();
            assert_eq!(r, i);
        }
    }

    #[test]
    fn sunset_preconditions() {
        let g = GroundSet::interval(1, 4).unwrap();
        let ab = g.y_ints(&[1, 2]).unwrap();
        let d = Rational::new(1, 2);
        let err = sunset(&g, &d, 1, 3, &ab, &ab, &g.full_sums(), &g.full_y(), &g.full_y(), SunsetOptions::default()).unwrap_err();
        assert!(err.to_string().contains("|B| >= lambda"));
        let err = sunset(&g, &d, 1, 1, &ab, &ab, &g.empty_sums(), &g.full_y(), &g.full_y(), SunsetOptions::default()).unwrap_err();
        assert!(err.to_string().contains("(A+B)^c"));
    }
}
