//! First-stage containers, the shrink step, and the staged container iteration.

use crate::bounds::supersaturation::{beta_for_target, supersaturation_check};
use crate::error::{domain, falsified, precondition, Result};
use crate::graph::{shrink_alternative, shrinking_holds, size_bound_holds, sumrise, Checking, Shrink, SumriseOutput};
use crate::group::GroundSet;
use crate::hypergraph::{hyper_edge_count, sunset, Branch, SunsetOptions, SunsetOutput};
use crate::rational::{ceil_coeff_sqrt, ceil_sqrt, ge_scaled, gt_sqrt, lt_scaled, to_string, Rational};
use crate::set::IndexSet;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ContainerTriple {
    pub c0: IndexSet,
    pub c1: IndexSet,
    pub c2: IndexSet,
}

impl ContainerTriple {
    pub fn contains_pair(&self, ground: &GroundSet, a: &IndexSet, b: &IndexSet) -> bool {
        a.is_subset_of(&self.c1)
            && b.is_subset_of(&self.c2)
            && ground.sumset_unchecked(a, b).complement().is_subset_of(&self.c0)
    }

    pub fn is_within(&self, outer: &ContainerTriple) -> bool {
        self.c0.is_subset_of(&outer.c0) && self.c1.is_subset_of(&outer.c1) && self.c2.is_subset_of(&outer.c2)
    }

    pub fn edges(&self, ground: &GroundSet) -> usize {
        hyper_edge_count(ground, &self.c0, &self.c1, &self.c2)
    }

    /// `e(H(C0, C1, C2)) < δ |C1| |C2|`.
    pub fn is_sparse(&self, ground: &GroundSet, delta: &Rational) -> bool {
        lt_scaled(self.edges(ground) as i128, delta, (self.c1.count() * self.c2.count()) as i128)
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.c0.count(), self.c1.count(), self.c2.count())
    }
}

/// Whether the size preconditions of the staged theorem are enforced, or fingerprint sizes
/// are clamped so small ground sets can be processed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    Theorem,
    Desk,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineParams {
    pub m: usize,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub epsilon: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub delta: Rational,
    /// Fingerprint size of the first-stage container for `A`.
    pub first_s: usize,
    /// Fingerprint size drawn from `B` for the first-stage container for `A`.
    pub first_lambda: usize,
    pub shrink_s: usize,
    pub shrink_lambda: usize,
    pub regime: Regime,
}

impl PipelineParams {
    /// `s = ⌈√m⌉`, `λ = ⌈(1+ε^{-2})√m⌉`, shrink steps with `s' = λ' = ⌈√m⌉`.
    pub fn theorem(m: usize, epsilon: Rational) -> Result<Self> {
        check_epsilon(&epsilon)?;
        if m == 0 {
            return Err(domain("m must be at least 1"));
        }
        let delta = epsilon * epsilon;
        let root = ceil_sqrt(m as u64) as usize;
        let lambda = ceil_coeff_sqrt(&(Rational::from_integer(1) + delta.recip()), m as u64) as usize;
        Ok(PipelineParams {
            m,
            epsilon,
            delta,
            first_s: root,
            first_lambda: lambda,
            shrink_s: root,
            shrink_lambda: root,
            regime: Regime::Theorem,
        })
    }

    /// Theorem parameters with every fingerprint size clamped to the smallest set sizes in the family.
    pub fn desk(m: usize, epsilon: Rational, min_a: usize, min_b: usize) -> Result<Self> {
        let mut p = Self::theorem(m, epsilon)?;
        if min_a == 0 || min_b == 0 {
            return Err(domain("desk regime needs nonempty sets"));
        }
        p.first_s = p.first_s.min(min_a);
        p.first_lambda = p.first_lambda.min(min_b);
        p.shrink_s = p.shrink_s.min(min_a.min(min_b));
        p.shrink_lambda = p.shrink_lambda.min(min_a.min(min_b));
        p.regime = Regime::Desk;
        Ok(p)
    }

    /// `⌊2^5 / δ⌋`.
    pub fn step_bound(&self) -> usize {
        (Rational::from_integer(32) / self.delta).floor().to_integer() as usize
    }
}

fn check_epsilon(eps: &Rational) -> Result<()> {
    if *eps <= Rational::from_integer(0) || *eps >= Rational::new(1, 4) {
        return Err(domain(format!("epsilon must lie in (0, 1/4), got {}", to_string(eps))));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FirstContainer {
    pub container: IndexSet,
    /// Fingerprint `(S, F)`: `S` from SUMRISE, `F` the first `λ` elements of the supplied set.
    pub s: IndexSet,
    pub f: IndexSet,
    pub run: SumriseOutput,
}

/// Container `C = S ∪ C1` for `A` from SUMRISE on `H^F(Y+Y, Y)`.
#[allow(clippy::too_many_arguments)]
pub fn first_container_for(
    ground: &GroundSet,
    a: &IndexSet,
    f: &IndexSet,
    s: usize,
    lambda: usize,
    m: usize,
    delta: &Rational,
    checking: Checking,
) -> Result<FirstContainer> {
    let one_plus = Rational::from_integer(1) + delta;
    let m_r = Rational::from_integer(m as i128);
    if checking == Checking::Strict {
        let lhs = *delta * Rational::from_integer((lambda * s) as i128);
        if lhs < one_plus * m_r {
            return Err(precondition(format!(
                "δλs >= (1+δ)m fails: δλs = {}, (1+δ)m = {}",
                to_string(&lhs),
                to_string(&(one_plus * m_r))
            )));
        }
        if f.count() < lambda {
            return Err(precondition(format!("|F| >= λ fails: |F| = {}, λ = {lambda}", f.count())));
        }
        let af = ground.sumset(a, f)?.count();
        if af > m {
            return Err(precondition(format!("|A+F| <= m fails: |A+F| = {af}, m = {m}")));
        }
    }
    let f_used = f.first(lambda);
    let run = sumrise(ground, s, a, &f_used, &ground.full_sums(), &ground.full_y(), Checking::Strict)?;
    let container = run.s.union(&run.c1);
    if checking == Checking::Strict && Rational::from_integer(container.count() as i128) > one_plus * m_r {
        return Err(falsified(format!("first-stage container of size {} exceeds (1+δ)m", container.count())));
    }
    Ok(FirstContainer { container, s: run.s.clone(), f: f_used, run })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FirstCollection {
    /// `(S, F) -> C`, in fingerprint order.
    pub containers: Vec<((IndexSet, IndexSet), IndexSet)>,
    /// Largest `|S| + |C1|` seen, for the `(1+δ)m` size check.
    pub max_size: usize,
}

/// Deduplicated first-stage collection over a family of pairs `(A, F)`.
#[allow(clippy::too_many_arguments)]
pub fn build_first_collection(
    ground: &GroundSet,
    family: &[(IndexSet, IndexSet)],
    s: usize,
    lambda: usize,
    m: usize,
    delta: &Rational,
    checking: Checking,
) -> Result<FirstCollection> {
    let runs: Vec<FirstContainer> = family
        .par_iter()
        .map(|(a, f)| first_container_for(ground, a, f, s, lambda, m, delta, checking))
        .collect::<Result<_>>()?;
    let mut map: BTreeMap<(IndexSet, IndexSet), IndexSet> = BTreeMap::new();
    let mut max_size = 0;
    for run in runs {
        max_size = max_size.max(run.container.count());
        let key = (run.s, run.f);
        if let Some(prev) = map.get(&key) {
            if *prev != run.container {
                return Err(falsified("equal SUMRISE fingerprints produced different containers"));
            }
        } else {
            map.insert(key, run.container);
        }
    }
    Ok(FirstCollection { containers: map.into_iter().collect(), max_size })
}

/// Which side SUMRISE acts on in a shrink step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// SUNSET(A, B) on `(U0, U1, U2)`: shrinks `U1`.
    Forward,
    /// SUNSET(B, A) on `(U0, U2, U1)`: shrinks `U2`.
    Swapped,
}

/// Which alternative of the shrink-step dichotomy a step satisfies, first match wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepLabel {
    #[serde(rename = "sparse")]
    Sparse,
    #[serde(rename = "shrunk-0")]
    ShrunkZero,
    /// The side SUMRISE acted on (`D1` forward, `D2` swapped) shrank.
    #[serde(rename = "shrunk-1")]
    ShrunkActive,
    /// None of the three; only possible outside the dichotomy's hypotheses.
    #[serde(rename = "none")]
    Unlabelled,
}

impl StepLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StepLabel::Sparse => "sparse",
            StepLabel::ShrunkZero => "shrunk-0",
            StepLabel::ShrunkActive => "shrunk-1",
            StepLabel::Unlabelled => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShrinkOutcome {
    pub triple: ContainerTriple,
    pub label: StepLabel,
    pub orientation: Orientation,
    pub sunset: SunsetOutput,
    /// Whether `λs >= m`, `|U_active| >= m/4` and `|A+B| <= m` all held.
    pub in_regime: bool,
    /// Shrinking alternative of the inner SUMRISE run, when its hypotheses (including `(A+F)^c ⊆ U0`) held.
    pub sumrise_shrinking: Option<bool>,
    /// `|S| + |C1| <= (1+δ)m` for the inner SUMRISE run, when its hypotheses held.
    pub sumrise_size_bound: Option<bool>,
}

/// One application of SUNSET producing `D = (C0, C1 ∪ S, C2 ∪ F)` (sides swapped back for [`Orientation::Swapped`]).
#[allow(clippy::too_many_arguments)]
pub fn shrink_step(
    ground: &GroundSet,
    a: &IndexSet,
    b: &IndexSet,
    u: &ContainerTriple,
    delta: &Rational,
    s: usize,
    lambda: usize,
    m: usize,
    orientation: Orientation,
    checking: Checking,
) -> Result<ShrinkOutcome> {
    let (x, y, ux, uy) = match orientation {
        Orientation::Forward => (a, b, &u.c1, &u.c2),
        Orientation::Swapped => (b, a, &u.c2, &u.c1),
    };
    let ab = ground.sumset(a, b)?.count();
    let in_regime = lambda * s >= m && 4 * ux.count() >= m && ab <= m;
    if checking == Checking::Strict && !in_regime {
        return Err(precondition(format!(
            "shrink step needs λs >= m, |U1| >= m/4, |A+B| <= m (λs = {}, |U1| = {}, |A+B| = {ab}, m = {m})",
            lambda * s,
            ux.count()
        )));
    }
    let run = sunset(ground, delta, s, lambda, x, y, &u.c0, ux, uy, SunsetOptions::default())?;

    let whole = run.c2.union(&run.f);
    let split = hyper_edge_count(ground, &run.c0, &run.c1, &run.c2) + hyper_edge_count(ground, &run.c0, &run.c1, &run.f);
    if hyper_edge_count(ground, &run.c0, &run.c1, &whole) != split {
        return Err(falsified("edge count of C2 ∪ F does not split over C2 and F"));
    }

    let active = run.c1.union(&run.s);
    let triple = match orientation {
        Orientation::Forward => ContainerTriple { c0: run.c0.clone(), c1: active.clone(), c2: whole },
        Orientation::Swapped => ContainerTriple { c0: run.c0.clone(), c1: whole, c2: active.clone() },
    };
    if !triple.contains_pair(ground, a, b) || !triple.is_within(u) {
        return Err(falsified("shrink step lost containment"));
    }

    let label = if triple.is_sparse(ground, delta) {
        StepLabel::Sparse
    } else {
        match shrink_alternative(triple.c0.count(), u.c0.count(), active.count(), ux.count(), m, delta) {
            Shrink::Zero => StepLabel::ShrunkZero,
            Shrink::One => StepLabel::ShrunkActive,
            Shrink::Neither => StepLabel::Unlabelled,
        }
    };
    if in_regime && label == StepLabel::Unlabelled {
        return Err(falsified(format!(
            "shrink step satisfies no alternative: |D0| = {}, |U0| = {}, |D1| = {}, |U1| = {}, m = {m}",
            triple.c0.count(),
            u.c0.count(),
            active.count(),
            ux.count()
        )));
    }

    let (mut sumrise_shrinking, mut sumrise_size_bound) = (None, None);
    if let (Some(inner), true) = (&run.sumrise, run.sums_outside_in_u0) {
        let xf = ground.sumset_unchecked(x, &run.f).count();
        let graph_edges = run.graph_edges;
        sumrise_shrinking =
            shrinking_holds(inner, u.c0.count(), ux.count(), graph_edges, xf, run.f.count(), s, lambda, m, delta);
        if sumrise_shrinking == Some(false) {
            return Err(falsified("SUMRISE shrinking alternative failed inside its hypotheses"));
        }
        sumrise_size_bound = size_bound_holds(inner, xf, run.f.count(), s, lambda, m, delta);
    }
    Ok(ShrinkOutcome { triple, label, orientation, sunset: run, in_regime, sumrise_shrinking, sumrise_size_bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Stage {
    S1,
    S2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub stage: Stage,
    pub orientation: Orientation,
    pub s: IndexSet,
    pub f: IndexSet,
    pub branch: Branch,
    pub label: StepLabel,
    pub in_regime: bool,
    pub sumrise_shrinking: Option<bool>,
    pub sumrise_size_bound: Option<bool>,
}

/// Fingerprint chain: first-stage `(S_A, F_B)`, `(S_B, F_A)`, then `(S, F)` per shrink step.
pub type FingerprintChain = Vec<(IndexSet, IndexSet)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContainerSequence {
    /// `D_0, D_1, ..., D_k`.
    pub triples: Vec<ContainerTriple>,
    pub steps: Vec<StepRecord>,
    pub chain: FingerprintChain,
    pub step_bound: usize,
    /// A stage stopped on a dense triple because a step outside the dichotomy's hypotheses made no progress.
    pub stalled: bool,
}

impl ContainerSequence {
    pub fn last(&self) -> &ContainerTriple {
        self.triples.last().expect("sequence has a first triple")
    }
}

/// The staged iteration: first-stage containers, shrink steps on `D1` (S1), then on `D2` (S2).
pub fn build_container_sequence(
    ground: &GroundSet,
    a: &IndexSet,
    b: &IndexSet,
    params: &PipelineParams,
) -> Result<ContainerSequence> {
    let m = params.m;
    let delta = &params.delta;
    let ab = ground.sumset(a, b)?.count();
    if ab > m {
        return Err(precondition(format!("|A+B| <= m fails: |A+B| = {ab}, m = {m}")));
    }
    let need_a = params.first_s.max(params.shrink_s).max(params.shrink_lambda);
    let need_b = params.first_lambda.max(params.shrink_s).max(params.shrink_lambda);
    if a.count() < need_a || b.count() < need_b {
        return Err(precondition(format!(
            "set sizes too small: |A| = {} needs >= {need_a}, |B| = {} needs >= {need_b}",
            a.count(),
            b.count()
        )));
    }
    let strict = match params.regime {
        Regime::Theorem => Checking::Strict,
        Regime::Desk => Checking::Unchecked,
    };
    let first_a = first_container_for(ground, a, b, params.first_s, params.first_lambda, m, delta, strict)?;
    let first_b = first_container_for(ground, b, a, params.first_lambda, params.first_s, m, delta, strict)?;
    let mut current = ContainerTriple { c0: ground.full_sums(), c1: first_a.container.clone(), c2: first_b.container.clone() };
    if !current.contains_pair(ground, a, b) {
        return Err(falsified("first-stage containers miss the pair"));
    }
    let mut seq = ContainerSequence {
        triples: vec![current.clone()],
        steps: Vec::new(),
        chain: vec![(first_a.s, first_a.f), (first_b.s, first_b.f)],
        step_bound: params.step_bound(),
        stalled: false,
    };
    for (stage, orientation) in [(Stage::S1, Orientation::Forward), (Stage::S2, Orientation::Swapped)] {
        loop {
            let active = match orientation {
                Orientation::Forward => current.c1.count(),
                Orientation::Swapped => current.c2.count(),
            };
            if 4 * active <= m || current.is_sparse(ground, delta) {
                break;
            }
            let out = shrink_step(
                ground,
                a,
                b,
                &current,
                delta,
                params.shrink_s,
                params.shrink_lambda,
                m,
                orientation,
                Checking::Unchecked,
            )?;
            if out.triple == current {
                if out.in_regime {
                    return Err(falsified("shrink step made no progress on a dense triple"));
                }
                seq.stalled = true;
                break;
            }
            seq.chain.push((out.sunset.s.clone(), out.sunset.f.clone()));
            seq.steps.push(StepRecord {
                stage,
                orientation,
                s: out.sunset.s.clone(),
                f: out.sunset.f.clone(),
                branch: out.sunset.branch,
                label: out.label,
                in_regime: out.in_regime,
                sumrise_shrinking: out.sumrise_shrinking,
                sumrise_size_bound: out.sumrise_size_bound,
            });
            current = out.triple;
            seq.triples.push(current.clone());
            if params.regime == Regime::Theorem && seq.steps.len() > seq.step_bound {
                return Err(falsified(format!("iteration exceeded {} shrink steps", seq.step_bound)));
            }
        }
        if current.is_sparse(ground, delta) {
            break;
        }
    }
    Ok(seq)
}

/// Final-triple checks of the staged theorem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FinalCheck {
    pub sparse: bool,
    pub small: bool,
    /// `|C1|, |C2| <= m/4` or sparse.
    pub dichotomy: bool,
    /// `|C1| + |C2| <= (1+2ε)(m+β)`, asserted only for sparse final triples.
    pub size_bound: Option<bool>,
    pub beta: u64,
}

pub fn final_check(ground: &GroundSet, triple: &ContainerTriple, params: &PipelineParams) -> Result<FinalCheck> {
    let m = params.m;
    let eps = &params.epsilon;
    let sparse = triple.is_sparse(ground, &params.delta);
    let small = 4 * triple.c1.count() <= m && 4 * triple.c2.count() <= m;
    let beta = beta_for_target(ground, m, eps)?;
    let mut size_bound = None;
    if sparse {
        // Pairs summing into C0 are exactly the hypergraph edges, so W = (Y+Y) \ C0.
        let w = triple.c0.complement();
        let sat = supersaturation_check(ground, &triple.c1, &triple.c2, &w, eps, None)?;
        if sat.hypothesis_holds && !sat.conclusion_holds {
            return Err(falsified("supersaturation conclusion failed on a final triple"));
        }
        let total = Rational::from_integer((triple.c1.count() + triple.c2.count()) as i128);
        let bound = (Rational::from_integer(1) + Rational::from_integer(2) * eps) * Rational::from_integer((m as u64 + beta) as i128);
        size_bound = Some(total <= bound);
    }
    Ok(FinalCheck { sparse, small, dichotomy: sparse || small, size_bound, beta })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub a: bool,
    pub b: bool,
    pub b1: Option<bool>,
    pub b2: Option<bool>,
    pub b1_weighted: Option<bool>,
    pub b2_weighted: Option<bool>,
}

impl Classification {
    /// First applicable of `a`, `b`, else `-`.
    pub fn label(&self) -> &'static str {
        if self.a {
            "a"
        } else if self.b {
            match (self.b1, self.b2) {
                (Some(true), _) => "b1",
                (_, Some(true)) => "b2",
                _ => "b",
            }
        } else {
            "-"
        }
    }
}

/// `|C| > (r + 2√ε) m`.
fn exceeds(c: usize, r: Rational, eps: &Rational, m: usize) -> bool {
    let m_r = Rational::from_integer(m as i128);
    let gap = Rational::from_integer(c as i128) - r * m_r;
    gt_sqrt(&gap, &(Rational::from_integer(4) * eps * m_r * m_r))
}

/// Container types by the thresholds `(1-ε)m`, `(1+2ε)m`, `(1/2 + 2√ε)m` and `(s/(s+s') + 2√ε)m`.
pub fn classify_container(
    ground: &GroundSet,
    triple: &ContainerTriple,
    eps: &Rational,
    m: usize,
    sizes: Option<(usize, usize)>,
) -> Classification {
    let total = (triple.c1.count() + triple.c2.count()) as i128;
    let one = Rational::from_integer(1);
    let m_r = Rational::from_integer(m as i128);
    let a = Rational::from_integer(total) <= (one - eps) * m_r;
    let sparse = lt_scaled(triple.edges(ground) as i128, &(eps * eps), (triple.c1.count() * triple.c2.count()) as i128);
    let b = Rational::from_integer(total) <= (one + Rational::from_integer(2) * eps) * m_r && sparse;
    let mut c = Classification { a, b, ..Default::default() };
    if b {
        let half = Rational::new(1, 2);
        let big = exceeds(triple.c1.count(), half, eps, m) || exceeds(triple.c2.count(), half, eps, m);
        c.b1 = Some(big);
        c.b2 = Some(!big);
        if let Some((s, s2)) = sizes {
            let sum = (s + s2) as i128;
            let big_w = exceeds(triple.c1.count(), Rational::new(s as i128, sum), eps, m)
                || exceeds(triple.c2.count(), Rational::new(s2 as i128, sum), eps, m);
            c.b1_weighted = Some(big_w);
            c.b2_weighted = Some(!big_w);
        }
    }
    c
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollectionEntry {
    pub chain: FingerprintChain,
    pub triple: ContainerTriple,
    pub labels: Vec<StepLabel>,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContainerCollection {
    /// Final triples keyed by fingerprint chain, in chain order.
    pub entries: Vec<CollectionEntry>,
    pub pairs: usize,
    pub max_steps: usize,
    pub step_bound: usize,
    pub first_stage_fingerprints: usize,
    /// Largest number of distinct shrink fingerprints below a single parent triple.
    pub max_fingerprints_per_parent: usize,
    pub final_dichotomy_failures: usize,
    pub size_bound_failures: usize,
    pub unlabelled_steps: usize,
    pub sumrise_shrinking_checked: usize,
    pub sumrise_size_bound_checked: usize,
    pub sumrise_size_bound_failures: usize,
    pub in_regime_steps: usize,
}

impl ContainerCollection {
    pub fn triples(&self) -> Vec<ContainerTriple> {
        self.entries.iter().map(|e| e.triple.clone()).collect()
    }

    /// `(binom(n, s') + 1) binom(n, λ')`.
    pub fn per_parent_bound(n: usize, s: usize, lambda: usize) -> BigUint {
        (crate::oracle::binomial(n as u64, s as u64) + 1u32) * crate::oracle::binomial(n as u64, lambda as u64)
    }
}

/// Runs the staged iteration on every pair and deduplicates final triples by fingerprint chain.
pub fn build_collection(
    ground: &GroundSet,
    pairs: &[(IndexSet, IndexSet)],
    params: &PipelineParams,
) -> Result<ContainerCollection> {
    let runs: Vec<(ContainerSequence, FinalCheck)> = pairs
        .par_iter()
        .map(|(a, b)| {
            let seq = build_container_sequence(ground, a, b, params)?;
            let fin = final_check(ground, seq.last(), params)?;
            Ok((seq, fin))
        })
        .collect::<Result<_>>()?;
    let mut entries: BTreeMap<FingerprintChain, CollectionEntry> = BTreeMap::new();
    let mut first_stage: BTreeSet<(IndexSet, IndexSet, IndexSet, IndexSet)> = BTreeSet::new();
    let mut per_parent: BTreeMap<&ContainerTriple, BTreeSet<(&IndexSet, &IndexSet)>> = BTreeMap::new();
    let mut out = ContainerCollection {
        entries: Vec::new(),
        pairs: pairs.len(),
        max_steps: 0,
        step_bound: params.step_bound(),
        first_stage_fingerprints: 0,
        max_fingerprints_per_parent: 0,
        final_dichotomy_failures: 0,
        size_bound_failures: 0,
        unlabelled_steps: 0,
        sumrise_shrinking_checked: 0,
        sumrise_size_bound_checked: 0,
        sumrise_size_bound_failures: 0,
        in_regime_steps: 0,
    };
    for (seq, fin) in &runs {
        out.max_steps = out.max_steps.max(seq.steps.len());
        first_stage.insert((seq.chain[0].0.clone(), seq.chain[0].1.clone(), seq.chain[1].0.clone(), seq.chain[1].1.clone()));
        for (k, step) in seq.steps.iter().enumerate() {
            per_parent.entry(&seq.triples[k]).or_default().insert((&step.s, &step.f));
            out.unlabelled_steps += (step.label == StepLabel::Unlabelled) as usize;
            out.in_regime_steps += step.in_regime as usize;
            out.sumrise_shrinking_checked += step.sumrise_shrinking.is_some() as usize;
            if let Some(ok) = step.sumrise_size_bound {
                out.sumrise_size_bound_checked += 1;
                out.sumrise_size_bound_failures += (!ok) as usize;
            }
        }
        out.final_dichotomy_failures += (!fin.dichotomy) as usize;
        out.size_bound_failures += (fin.size_bound == Some(false)) as usize;
        let entry = CollectionEntry {
            chain: seq.chain.clone(),
            triple: seq.last().clone(),
            labels: seq.steps.iter().map(|s| s.label).collect(),
            branches: seq.steps.iter().map(|s| s.branch).collect(),
        };
        match entries.get(&seq.chain) {
            Some(prev) if prev.triple != entry.triple => {
                return Err(falsified("equal fingerprint chains produced different triples"));
            }
            Some(_) => {}
            None => {
                entries.insert(seq.chain.clone(), entry);
            }
        }
    }
    out.first_stage_fingerprints = first_stage.len();
    out.max_fingerprints_per_parent = per_parent.values().map(|v| v.len()).max().unwrap_or(0);
    out.entries = entries.into_values().collect();
    Ok(out)
}

/// `true` if the step count respects `⌊2^5/δ⌋`.
pub fn within_step_bound(seq: &ContainerSequence) -> bool {
    seq.steps.len() <= seq.step_bound
}

/// `e >= δ a b` convenience for callers holding raw counts.
pub fn dense(e: usize, delta: &Rational, a: usize, b: usize) -> bool {
    ge_scaled(e as i128, delta, (a * b) as i128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_parameters() {
        let p = PipelineParams::theorem(9, Rational::new(1, 5)).unwrap();
        assert_eq!((p.first_s, p.first_lambda, p.shrink_s), (3, 78, 3));
        assert_eq!(p.delta, Rational::new(1, 25));
        assert_eq!(p.step_bound(), 800);
        assert!(PipelineParams::theorem(9, Rational::new(1, 4)).is_err());
        let d = PipelineParams::desk(9, Rational::new(1, 5), 2, 2).unwrap();
        assert_eq!((d.first_s, d.first_lambda, d.shrink_s, d.shrink_lambda), (2, 2, 2, 2));
    }

    #[test]
    fn first_container_refuses_bad_parameters() {
        let g = GroundSet::interval(1, 12).unwrap();
        let a = g.y_ints(&[1, 2, 3]).unwrap();
        let f = g.y_ints(&[1, 2, 3, 4]).unwrap();
        // δλs = 8 < (1+δ)m = 16
        let err = first_container_for(&g, &a, &f, 2, 4, 8, &Rational::from_integer(1), Checking::Strict).unwrap_err();
        assert!(err.to_string().contains("δλs"));
        let c = first_container_for(&g, &a, &f, 2, 4, 8, &Rational::from_integer(1), Checking::Unchecked).unwrap();
        assert!(a.is_subset_of(&c.container));
        assert!(c.container.count() <= 16);
    }

    #[test]
    fn first_container_in_range() {
        let g = GroundSet::interval(1, 12).unwrap();
        let a = g.y_ints(&[1, 2, 3]).unwrap();
        let f = g.y_ints(&[1, 2, 3, 4, 5, 6]).unwrap();
        // δ = 2, λ = 6, s = 2: 24 >= 3 * 8
        let c = first_container_for(&g, &a, &f, 2, 6, 8, &Rational::from_integer(2), Checking::Strict).unwrap();
        assert!(a.is_subset_of(&c.container));
        assert!(c.container.count() <= 24);
    }

    #[test]
    fn shrink_step_worked_example() {
        let g = GroundSet::interval(1, 4).unwrap();
        let ab = g.y_ints(&[1, 2]).unwrap();
        let u = ContainerTriple { c0: g.full_sums(), c1: g.full_y(), c2: g.full_y() };
        let out =
            shrink_step(&g, &ab, &ab, &u, &Rational::new(9, 10), 1, 1, 3, Orientation::Forward, Checking::Unchecked)
                .unwrap();
        assert!(!out.in_regime);
        let mut c0 = g.ints(&out.triple.c0);
        c0.sort();
        assert_eq!(c0, vec![3, 4, 5, 6, 7, 8]);
        assert_eq!(g.ints(&out.triple.c1), vec![1, 2, 3, 4]);
        assert_eq!(g.ints(&out.triple.c2), vec![1, 2, 3, 4]);
        // e(H(D)) = 15 >= 0.9 * 16, so not sparse; |U0| - |D0| = 1 and 6 >= 0.9 * 3.
        assert_eq!(out.triple.edges(&g), 15);
        assert_eq!(out.label, StepLabel::ShrunkZero);
    }

    #[test]
    fn else_branch_is_sparse() {
        // Every pair of A sums into A+A, which U0 excludes, so no SUNSET test fires.
        let g = GroundSet::interval(1, 10).unwrap();
        let a = g.y_ints(&[1, 2, 3]).unwrap();
        let u2 = g.y_ints(&[1, 2, 3, 4]).unwrap();
        let u = ContainerTriple { c0: g.sumset_complement(&a, &a).unwrap(), c1: a.clone(), c2: u2 };
        let out = shrink_step(&g, &a, &a, &u, &Rational::new(1, 2), 3, 2, 5, Orientation::Forward, Checking::Strict)
            .unwrap();
        assert_eq!(out.sunset.branch, Branch::Else);
        assert_eq!(out.label, StepLabel::Sparse);
        assert_eq!(out.triple.c1, a);
        assert_eq!(out.triple.c2, a);
    }

    #[test]
    fn desk_sequence_n14_m9() {
        let g = GroundSet::interval(1, 14).unwrap();
        let a = g.y_ints(&[2, 3, 4, 5]).unwrap();
        let params = PipelineParams::desk(9, Rational::new(1, 5), 4, 4).unwrap();
        let seq = build_container_sequence(&g, &a, &a, &params).unwrap();
        for w in seq.triples.windows(2) {
            assert!(w[1].is_within(&w[0]));
        }
        for t in &seq.triples {
            assert!(t.contains_pair(&g, &a, &a));
        }
        assert!(seq.triples[0].c1.count() <= 14);
        let fin = final_check(&g, seq.last(), &params).unwrap();
        assert!(fin.dichotomy);
        assert!(within_step_bound(&seq));
    }

    #[test]
    fn theorem_regime_rejects_desk_sizes() {
        let g = GroundSet::interval(1, 14).unwrap();
        let a = g.y_ints(&[2, 3, 4, 5]).unwrap();
        let params = PipelineParams::theorem(9, Rational::new(1, 5)).unwrap();
        assert!(build_container_sequence(&g, &a, &a, &params).is_err());
    }

    #[test]
    fn classification_thresholds() {
        let g = GroundSet::interval(1, 200).unwrap();
        let eps = Rational::new(1, 10);
        let mk = |n1: usize, n2: usize| ContainerTriple {
            c0: g.empty_sums(),
            c1: g.y_from_indices(0..n1),
            c2: g.y_from_indices(0..n2),
        };
        assert_eq!(classify_container(&g, &mk(40, 45), &eps, 100, None).label(), "a");
        assert_eq!(classify_container(&g, &mk(45, 45), &eps, 100, None).label(), "a");
        let c = classify_container(&g, &mk(50, 55), &eps, 100, Some((1, 1)));
        assert!(!c.a && c.b);
        // 55 <= (1/2 + 2√0.1) 100 ≈ 113
        assert_eq!(c.b2, Some(true));
        assert_eq!(classify_container(&g, &mk(70, 60), &eps, 100, None).label(), "-");
    }
}
