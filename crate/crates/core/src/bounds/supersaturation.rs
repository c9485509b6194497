//! Supersaturation: oversized pairs `(D1, D2)` force many sums outside a small target `W`.

use crate::error::{domain, Result};
use crate::group::{beta, GroundSet};
use crate::rational::Rational;
use crate::set::IndexSet;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupersaturationReport {
    pub beta: u64,
    /// `|D1| + |D2| >= (1+2ε)(|W| + β)`.
    pub hypothesis_holds: bool,
    /// `|{(u, v) ∈ D1 x D2 : u + v ∉ W}|`.
    pub out_pairs: usize,
    /// `out_pairs >= ε² |D1| |D2|`.
    pub conclusion_holds: bool,
}

/// `β` for a target of size `w`: largest subgroup of size at most `⌊(1+4ε)w⌋` (at least the trivial one).
pub fn beta_for_target(ground: &GroundSet, w: usize, eps: &Rational) -> Result<u64> {
    let cap = ((Rational::from_integer(1) + Rational::from_integer(4) * eps) * Rational::from_integer(w as i128))
        .floor()
        .to_integer();
    beta(ground.spec(), cap.max(1) as u64)
}

pub fn supersaturation_check(
    ground: &GroundSet,
    d1: &IndexSet,
    d2: &IndexSet,
    w: &IndexSet,
    eps: &Rational,
    beta: Option<u64>,
) -> Result<SupersaturationReport> {
    if *eps <= Rational::from_integer(0) || *eps >= Rational::new(1, 4) {
        return Err(domain(format!("epsilon must lie in (0, 1/4), got {eps}")));
    }
    let beta = match beta {
        Some(b) => b,
        None => beta_for_target(ground, w.count(), eps)?,
    };
    let (n1, n2) = (d1.count() as i128, d2.count() as i128);
    let one = Rational::from_integer(1);
    let hypothesis_holds = Rational::from_integer(n1 + n2)
        >= (one + Rational::from_integer(2) * eps) * Rational::from_integer(w.count() as i128 + beta as i128);
    let mut out_pairs = 0;
    for u in d1.iter() {
        for v in d2.iter() {
            if !w.contains(ground.sum_index(u, v)) {
                out_pairs += 1;
            }
        }
    }
    let conclusion_holds = Rational::from_integer(out_pairs as i128) >= eps * eps * Rational::from_integer(n1 * n2);
    Ok(SupersaturationReport { beta, hypothesis_holds, out_pairs, conclusion_holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let g = GroundSet::interval(1, 6).unwrap();
        let y = g.full_y();
        let w = g.sums_ints(&[2, 3, 4, 5, 6, 7, 8]).unwrap();
        let r = supersaturation_check(&g, &y, &y, &w, &Rational::new(1, 5), Some(1)).unwrap();
        assert!(r.hypothesis_holds);
        assert_eq!(r.out_pairs, 10);
        assert!(r.conclusion_holds);
    }

    #[test]
    fn below_threshold_and_empty_target() {
        let g = GroundSet::interval(1, 6).unwrap();
        let d = g.y_ints(&[1, 2]).unwrap();
        let w = g.full_sums();
        let r = supersaturation_check(&g, &d, &d, &w, &Rational::new(1, 5), None).unwrap();
        assert!(!r.hypothesis_holds);
        let r = supersaturation_check(&g, &d, &d, &g.empty_sums(), &Rational::new(1, 5), None).unwrap();
        assert_eq!(r.out_pairs, 4);
        assert!(r.conclusion_holds);
        assert!(supersaturation_check(&g, &d, &d, &w, &Rational::new(1, 4), None).is_err());
    }

    #[test]
    fn beta_uses_group() {
        let g = GroundSet::whole(crate::group::GroupSpec::Cyclic(12)).unwrap();
        // ⌊(1 + 0.8) * 4⌋ = 7 -> largest subgroup of size <= 7 is 6
        assert_eq!(beta_for_target(&g, 4, &Rational::new(1, 5)).unwrap(), 6);
    }
}
