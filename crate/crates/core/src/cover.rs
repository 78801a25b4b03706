//! Finite covers by ring elements: outer-measure upper bounds, cover
//! verification and uncovered-box witnesses.
//!
//! Covers are checked against outer hulls of the elements, which contain the
//! true sets. A missing piece of a hull is therefore missing from the element
//! too, so witnesses are sound; a covering hull only certifies a cover of the
//! hulls, and the stronger structural test in [`stage_robust`] is needed
//! before a cover is trusted for the true sets.

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cantor::{CantorSchedule, GapCertificate, GapSearch};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Aabb, BoxUnion, OpenBox};
use crate::rational::{q, serde_q, Q};
use crate::ring::{Generator, RingExpr};

/// Drops subtrahends: `A \ B` and `A ∩ B` become `A`. The result has only
/// generator and union nodes and contains the input set.
pub fn positive_hull(e: &RingExpr) -> RingExpr {
    match e {
        RingExpr::Gen(_) => e.clone(),
        RingExpr::Union(a, b) => RingExpr::union(positive_hull(a), positive_hull(b)),
        RingExpr::Diff(a, _) | RingExpr::Inter(a, _) => positive_hull(a),
    }
}

fn hull_union(s: &CantorSchedule, elements: &[RingExpr], n: u32) -> Result<BoxUnion> {
    let mut u = BoxUnion::empty(s.d);
    for e in elements {
        u = u.union(&positive_hull(e).approx_set(s, n)?)?;
    }
    Ok(u)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverCheck {
    pub stage: u32,
    /// The target lies inside the union of the stage-`n` outer hulls.
    pub covers_outer_hulls: bool,
    /// Measure of the target left outside the hulls.
    #[serde(with = "serde_q")]
    pub uncovered_measure: Q,
    /// The true target is covered by the true elements. For a box union this
    /// only happens when it is empty.
    pub stage_robust: bool,
}

/// Exact inclusion of `target` in the union of the elements' stage-`n` hulls.
pub fn verify_cover(
    s: &CantorSchedule,
    target: &BoxUnion,
    elements: &[RingExpr],
    n: u32,
) -> Result<CoverCheck> {
    check_dim(s.d, target.dim())?;
    let u = hull_union(s, elements, n)?;
    let rest = target.subtract(&u)?;
    Ok(CoverCheck {
        stage: n,
        covers_outer_hulls: rest.is_empty(),
        uncovered_measure: rest.measure()?,
        stage_robust: target.is_empty(),
    })
}

/// Sufficient condition for `target ⊆ ∪ elements` as true sets.
///
/// Every generator `(C^d + x) ∩ I` of the target's hull must either have an
/// empty stage-`n` set (then it is empty) or have `I` covered by the clips of
/// generators with the same translation taken from elements built from
/// generators and unions only.
pub fn stage_robust(
    s: &CantorSchedule,
    target: &RingExpr,
    elements: &[RingExpr],
    n: u32,
) -> Result<bool> {
    let positive: Vec<&Generator> = elements
        .iter()
        .filter(|e| e.is_monotone() && !contains_inter(e))
        .flat_map(|e| e.leaves())
        .collect();
    let hull = positive_hull(target);
    for leaf in hull.leaves() {
        if !s.leaf_meets(n, &leaf.translation, &leaf.clip, None)? {
            continue;
        }
        let clips: Vec<Aabb> = positive
            .iter()
            .filter(|g| g.translation == leaf.translation)
            .map(|g| g.clip.clone())
            .collect();
        let cover = BoxUnion::from_boxes(s.d, &clips)?;
        if !BoxUnion::from_box(&leaf.clip).is_subset_of(&cover)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn contains_inter(e: &RingExpr) -> bool {
    match e {
        RingExpr::Gen(_) => false,
        RingExpr::Inter(..) => true,
        RingExpr::Union(a, b) | RingExpr::Diff(a, b) => contains_inter(a) || contains_inter(b),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverTarget {
    Box(Aabb),
    Expr(RingExpr),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverAttempt {
    pub target: CoverTarget,
    pub elements: Vec<RingExpr>,
    pub stage: u32,
    #[serde(with = "serde_q")]
    pub total_premeasure_upper: Q,
    pub covers_outer_hulls: bool,
    pub stage_robust: bool,
    pub verified: bool,
}

/// Result of the outer-measure search. `Infinite` stands in for `inf ∅`.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum OuterUpper {
    Finite {
        attempt: CoverAttempt,
        /// All subsets of the candidate pool were examined.
        exhaustive: bool,
        subsets_checked: usize,
    },
    Infinite {
        /// Present for solid box targets: an open box no element can reach.
        witness: Option<UncoveredWitness>,
        exhaustive: bool,
        subsets_checked: usize,
    },
}

impl OuterUpper {
    pub fn total(&self) -> Option<&Q> {
        match self {
            OuterUpper::Finite { attempt, .. } => Some(&attempt.total_premeasure_upper),
            OuterUpper::Infinite { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub stage: u32,
    /// Maximum number of subsets examined by the exhaustive phase.
    pub budget: usize,
    pub stage_cap: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { stage: 8, budget: 4096, stage_cap: 12 }
    }
}

struct Candidate {
    expr: RingExpr,
    hull_set: BoxUnion,
    cost: Q,
}

/// Upper bound for the outer measure of `target` by a finite cover drawn from
/// `pool` (each element also offered clipped to every clip box of the
/// target's generators). Greedy by marginal covered measure first, then
/// subsets in order of size up to the budget; ties go to the lowest index.
pub fn outer_upper(
    s: &CantorSchedule,
    target: &CoverTarget,
    pool: &[RingExpr],
    cfg: &SearchConfig,
) -> Result<OuterUpper> {
    for e in pool {
        e.validate(s.d)?;
    }
    let expr = match target {
        CoverTarget::Box(b) => {
            check_dim(s.d, b.dim())?;
            if b.is_empty() {
                let attempt = CoverAttempt {
                    target: target.clone(),
                    elements: vec![],
                    stage: cfg.stage,
                    total_premeasure_upper: Q::zero(),
                    covers_outer_hulls: true,
                    stage_robust: true,
                    verified: true,
                };
                return Ok(OuterUpper::Finite { attempt, exhaustive: true, subsets_checked: 0 });
            }
            if !b.is_bounded() {
                return Err(Error::Unbounded("cover target box".into()));
            }
            // a box with interior is never covered; look for proof
            let witness = match find_uncovered_box(s, b, pool, cfg.stage_cap)? {
                UncoveredSearch::Found(w) => Some(w),
                UncoveredSearch::NeedsDeeperStage { .. } => None,
            };
            return Ok(OuterUpper::Infinite { witness, exhaustive: true, subsets_checked: 0 });
        }
        CoverTarget::Expr(e) => e,
    };
    expr.validate(s.d)?;
    let n = cfg.stage;
    let target_set = expr.approx_set(s, n)?;

    let mut exprs: Vec<RingExpr> = pool.to_vec();
    let hull = positive_hull(expr);
    let mut clips: Vec<&Aabb> = Vec::new();
    for g in hull.leaves() {
        if !clips.contains(&&g.clip) {
            clips.push(&g.clip);
        }
    }
    for p in pool {
        for c in &clips {
            let e = p.clip_to_box(c)?;
            if !exprs.contains(&e) {
                exprs.push(e);
            }
        }
    }
    let mut cands = Vec::new();
    for e in exprs {
        let hull_set = positive_hull(&e).approx_set(s, n)?.intersect(&target_set)?;
        if hull_set.is_empty() && !target_set.is_empty() {
            continue;
        }
        let cost = e.measure_bounds(s, n)?.upper;
        cands.push(Candidate { expr: e, hull_set, cost });
    }

    let check = |idx: &[usize]| -> Result<(bool, bool)> {
        let mut u = BoxUnion::empty(s.d);
        for &i in idx {
            u = u.union(&cands[i].hull_set)?;
        }
        let covers = target_set.is_subset_of(&u)?;
        let elems: Vec<RingExpr> = idx.iter().map(|&i| cands[i].expr.clone()).collect();
        let robust = covers && stage_robust(s, expr, &elems, n)?;
        Ok((covers, robust))
    };
    let cost_of = |idx: &[usize]| idx.iter().fold(Q::zero(), |acc, &i| acc + &cands[i].cost);

    let mut best: Option<(Q, Vec<usize>)> = None;
    let mut checked = 0usize;

    if target_set.is_empty() && stage_robust(s, expr, &[], n)? {
        best = Some((Q::zero(), vec![]));
    }

    // greedy phase
    if best.is_none() {
        let mut chosen: Vec<usize> = Vec::new();
        let mut covered = BoxUnion::empty(s.d);
        loop {
            let mut pick: Option<(usize, Q)> = None;
            for (i, c) in cands.iter().enumerate() {
                if chosen.contains(&i) {
                    continue;
                }
                let gain = c.hull_set.subtract(&covered)?.measure()?;
                if gain > Q::zero() && pick.as_ref().is_none_or(|(_, g)| gain > *g) {
                    pick = Some((i, gain));
                }
            }
            let Some((i, _)) = pick else { break };
            chosen.push(i);
            covered = covered.union(&cands[i].hull_set)?;
            if target_set.is_subset_of(&covered)? {
                break;
            }
        }
        chosen.sort_unstable();
        checked += 1;
        if check(&chosen)?.1 {
            best = Some((cost_of(&chosen), chosen));
        }
    }

    // exhaustive phase
    let m = cands.len();
    let mut exhaustive = true;
    'sizes: for k in 1..=m {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if checked >= cfg.budget {
                exhaustive = false;
                break 'sizes;
            }
            checked += 1;
            let cost = cost_of(&idx);
            let better = best.as_ref().is_none_or(|(b, _)| cost < *b);
            if better && check(&idx)?.1 {
                best = Some((cost, idx.clone()));
            }
            // next combination in lexicographic order
            let mut i = k;
            while i > 0 && idx[i - 1] == m - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    Ok(match best {
        Some((total, idx)) => {
            let elements: Vec<RingExpr> = idx.iter().map(|&i| cands[i].expr.clone()).collect();
            OuterUpper::Finite {
                attempt: CoverAttempt {
                    target: target.clone(),
                    elements,
                    stage: n,
                    total_premeasure_upper: total,
                    covers_outer_hulls: true,
                    stage_robust: true,
                    verified: true,
                },
                exhaustive,
                subsets_checked: checked,
            }
        }
        None => OuterUpper::Infinite { witness: None, exhaustive, subsets_checked: checked },
    })
}

/// One generator of an element's hull, shown disjoint from the witness box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafCertificate {
    pub element: usize,
    pub leaf: usize,
    pub gap: GapCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UncoveredWitness {
    #[serde(rename = "box")]
    pub witness: OpenBox,
    pub stage: u32,
    pub certificates: Vec<LeafCertificate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum UncoveredSearch {
    Found(UncoveredWitness),
    NeedsDeeperStage { deepest: u32 },
}

impl UncoveredSearch {
    pub fn witness(&self) -> Option<&UncoveredWitness> {
        match self {
            UncoveredSearch::Found(w) => Some(w),
            UncoveredSearch::NeedsDeeperStage { .. } => None,
        }
    }
}

/// Hull generators of every element, tagged `(element, leaf)`.
fn hull_leaves(elements: &[RingExpr]) -> Vec<(usize, usize, Generator)> {
    let mut out = Vec::new();
    for (k, e) in elements.iter().enumerate() {
        for (l, g) in positive_hull(e).leaves().into_iter().enumerate() {
            out.push((k, l, g.clone()));
        }
    }
    out
}

/// Open box inside `target` missing every element.
///
/// First the sequential strategy: walk the hull generators in element order,
/// shrinking the current box into a gap of each. If some generator has no gap
/// up to `stage_cap`, fall back to a single-axis search: for each stage and
/// axis, take the widest open interval of the target's projection avoiding
/// the projections of all generators.
pub fn find_uncovered_box(
    s: &CantorSchedule,
    target: &Aabb,
    elements: &[RingExpr],
    stage_cap: u32,
) -> Result<UncoveredSearch> {
    check_dim(s.d, target.dim())?;
    if !target.is_bounded() {
        return Err(Error::Unbounded("uncovered-box target".into()));
    }
    if !target.is_solid() {
        return Err(Error::precondition("target box needs positive sides"));
    }
    for e in elements {
        e.validate(s.d)?;
    }
    let leaves = hull_leaves(elements);
    let interior = OpenBox::interior_of(target)?;
    let found = match sequential(s, &interior, &leaves, stage_cap)? {
        Some(w) => Some(w),
        None => single_axis(s, &interior, &leaves, stage_cap)?,
    };
    Ok(match found {
        Some(w) => {
            debug_assert!(w.verify(s, target, elements).unwrap_or(false));
            UncoveredSearch::Found(w)
        }
        None => UncoveredSearch::NeedsDeeperStage { deepest: stage_cap },
    })
}

fn finish(witness: OpenBox, mut certs: Vec<LeafCertificate>) -> UncoveredWitness {
    let stage = certs.iter().map(|c| c.gap.stage).max().unwrap_or(0);
    for c in &mut certs {
        c.gap.witness = witness.clone();
    }
    UncoveredWitness { witness, stage, certificates: certs }
}

fn sequential(
    s: &CantorSchedule,
    interior: &OpenBox,
    leaves: &[(usize, usize, Generator)],
    cap: u32,
) -> Result<Option<UncoveredWitness>> {
    let mut j = interior.clone();
    let mut certs = Vec::with_capacity(leaves.len());
    for (k, l, g) in leaves {
        let mut gap = GapCertificate {
            stage: 0,
            witness: j.clone(),
            translation: g.translation.clone(),
            clip: Some(g.clip.clone()),
        };
        if !gap.verify(s)? {
            match s.find_gap(&g.translation, &j, cap)? {
                GapSearch::Found(found) => {
                    j = found.witness;
                    gap.stage = found.stage;
                }
                GapSearch::NeedsDeeperStage { .. } => return Ok(None),
            }
        }
        certs.push(LeafCertificate { element: *k, leaf: *l, gap });
    }
    Ok(Some(finish(j, certs)))
}

fn single_axis(
    s: &CantorSchedule,
    interior: &OpenBox,
    leaves: &[(usize, usize, Generator)],
    cap: u32,
) -> Result<Option<UncoveredWitness>> {
    for m in 0..=cap {
        let mut best: Option<(Q, usize, Q, Q)> = None;
        for axis in 0..s.d {
            let (p, qq) = (interior.lo(axis), interior.hi(axis));
            let mut blocked: Vec<(Q, Q)> = Vec::new();
            for (_, _, g) in leaves {
                if !s.leaf_meets(m, &g.translation, &g.clip, Some(interior))? {
                    continue;
                }
                let t = &g.translation[axis];
                let (_, pieces) =
                    s.axis_blocks(m, t, &g.clip.lo[axis], &g.clip.hi[axis], Some((p, qq)))?;
                blocked.extend(pieces);
            }
            blocked.sort();
            let mut cursor = p.clone();
            for (a, b) in blocked.into_iter().chain(std::iter::once((qq.clone(), qq.clone()))) {
                if a > cursor {
                    let width = &a - &cursor;
                    if best.as_ref().is_none_or(|bst| width > bst.0) {
                        best = Some((width, axis, cursor.clone(), a.clone()));
                    }
                }
                if b > cursor {
                    cursor = b;
                }
            }
        }
        if let Some((_, axis, lo, hi)) = best {
            let w = interior.with_side(axis, lo, hi)?.shrink(&q(1, 8));
            let certs = leaves
                .iter()
                .map(|(k, l, g)| LeafCertificate {
                    element: *k,
                    leaf: *l,
                    gap: GapCertificate {
                        stage: m,
                        witness: w.clone(),
                        translation: g.translation.clone(),
                        clip: Some(g.clip.clone()),
                    },
                })
                .collect();
            return Ok(Some(finish(w, certs)));
        }
    }
    Ok(None)
}

impl UncoveredWitness {
    /// Replays every check from the data alone: the box sits inside the
    /// target, there is one valid certificate per hull generator, and the
    /// elements' hull stage sets miss the box.
    pub fn verify(&self, s: &CantorSchedule, target: &Aabb, elements: &[RingExpr]) -> Result<bool> {
        if !target.contains_box(self.witness.carrier()) {
            return Ok(false);
        }
        let leaves = hull_leaves(elements);
        if leaves.len() != self.certificates.len() {
            return Ok(false);
        }
        for ((k, l, g), c) in leaves.iter().zip(&self.certificates) {
            let matches = c.element == *k
                && c.leaf == *l
                && c.gap.translation == g.translation
                && c.gap.clip.as_ref() == Some(&g.clip)
                && c.gap.stage <= self.stage
                && self.witness.carrier().intersect(c.gap.witness.carrier())? == *self.witness.carrier();
            if !matches || !c.gap.verify(s)? {
                return Ok(false);
            }
        }
        for (_, _, g) in &leaves {
            if s.leaf_meets(self.stage, &g.translation, &g.clip, Some(&self.witness))? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The `k`-th point of the `g^d` grid with spacing `1/g`, first coordinate
/// most significant.
fn grid_point(k: usize, g: usize, d: usize) -> Vec<Q> {
    let mut x = vec![Q::zero(); d];
    let mut rest = k;
    for i in (0..d).rev() {
        x[i] = q((rest % g) as i64, g as i64);
        rest /= g;
    }
    x
}

/// `pool_size` translates of `C^d` on the coarsest grid `{0, 1/g, ...}^d`
/// with at least that many points, each clipped to `[0, 1)^d`.
pub fn grid_pool(d: usize, pool_size: usize) -> Vec<RingExpr> {
    let mut g = 1usize;
    while g.pow(d as u32) < pool_size {
        g += 1;
    }
    (0..pool_size).map(|k| RingExpr::clipped_translate(grid_point(k, g, d))).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CubeRow {
    /// Pool indices of the family.
    pub subset: Vec<usize>,
    pub outcome: UncoveredSearch,
}

#[derive(Clone, Debug, Serialize)]
pub struct InfiniteCubeReport {
    pub d: usize,
    pub pool: Vec<RingExpr>,
    pub stage_cap: u32,
    pub families: usize,
    pub witnesses: usize,
    pub inconclusive: usize,
    pub max_stage: u32,
    pub rows: Vec<CubeRow>,
}

pub const MAX_POOL: usize = 20;

/// Tries every nonempty subfamily of a grid pool (the single empty family when
/// the pool is empty) against `[0, 1)^d`.
pub fn infinite_cube_report(
    s: &CantorSchedule,
    pool_size: usize,
    stage_cap: u32,
) -> Result<InfiniteCubeReport> {
    if pool_size > MAX_POOL {
        return Err(Error::Budget(format!("pool of {pool_size} exceeds {MAX_POOL} elements")));
    }
    let pool = grid_pool(s.d, pool_size);
    let target = Aabb::unit(s.d);
    let masks: Vec<u32> = if pool_size == 0 { vec![0] } else { (1..1u32 << pool_size).collect() };
    let rows = masks
        .par_iter()
        .map(|&mask| {
            let subset: Vec<usize> = (0..pool_size).filter(|i| mask & (1 << i) != 0).collect();
            let family: Vec<RingExpr> = subset.iter().map(|&i| pool[i].clone()).collect();
            let outcome = find_uncovered_box(s, &target, &family, stage_cap)?;
            Ok(CubeRow { subset, outcome })
        })
        .collect::<Result<Vec<_>>>()?;
    let witnesses = rows.iter().filter(|r| r.outcome.witness().is_some()).count();
    let max_stage = rows.iter().filter_map(|r| r.outcome.witness()).map(|w| w.stage).max().unwrap_or(0);
    Ok(InfiniteCubeReport {
        d: s.d,
        families: rows.len(),
        witnesses,
        inconclusive: rows.len() - witnesses,
        max_stage,
        pool,
        stage_cap,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn iv(a: Q, b: Q) -> Aabb {
        Aabb::from_q(vec![a], vec![b]).unwrap()
    }

    #[test]
    fn hull_rules() {
        let a = RingExpr::cantor(1);
        let b = RingExpr::clipped_translate(vec![q(1, 4)]);
        let c = RingExpr::clipped_translate(vec![q(1, 2)]);
        assert_eq!(positive_hull(&RingExpr::diff(a.clone(), b.clone())), a);
        let u = RingExpr::union(a.clone(), b.clone());
        assert_eq!(positive_hull(&u), u);
        assert_eq!(positive_hull(&RingExpr::diff(u.clone(), c)), u);
    }

    #[test]
    fn cover_checks() {
        let s = CantorSchedule::standard(1);
        let c = RingExpr::cantor(1);
        for n in 0..6 {
            let t = c.approx_set(&s, n).unwrap();
            assert!(verify_cover(&s, &t, std::slice::from_ref(&c), n).unwrap().covers_outer_hulls);
            let unit = BoxUnion::from_box(&Aabb::unit(1));
            let r = verify_cover(&s, &unit, std::slice::from_ref(&c), n).unwrap();
            assert_eq!(r.covers_outer_hulls, n == 0);
            assert!(!r.stage_robust);
        }
        let r = verify_cover(&s, &BoxUnion::empty(1), &[], 3).unwrap();
        assert!(r.covers_outer_hulls && r.stage_robust);
    }

    #[test]
    fn witness_against_c() {
        let s = CantorSchedule::standard(1);
        let c = RingExpr::cantor(1);
        let w = find_uncovered_box(&s, &Aabb::unit(1), std::slice::from_ref(&c), 12).unwrap();
        let w = w.witness().unwrap();
        assert_eq!(w.stage, 1);
        assert!(*w.witness.lo(0) >= q(3, 8) && *w.witness.hi(0) <= q(5, 8));
        assert!(w.verify(&s, &Aabb::unit(1), &[c]).unwrap());
    }

    #[test]
    fn witness_without_elements() {
        let s = CantorSchedule::standard(2);
        let w = find_uncovered_box(&s, &Aabb::unit(2), &[], 12).unwrap();
        let w = w.witness().unwrap();
        assert_eq!(w.witness, OpenBox::interior_of(&Aabb::unit(2)).unwrap());
        assert!(w.certificates.is_empty());
    }

    #[test]
    fn witness_two_translates() {
        let s = CantorSchedule::standard(1);
        let els = [RingExpr::cantor(1), RingExpr::clipped_translate(vec![q(1, 4)])];
        let w = find_uncovered_box(&s, &Aabb::unit(1), &els, 12).unwrap();
        let w = w.witness().unwrap();
        assert!(w.stage <= 4);
        assert!(w.verify(&s, &Aabb::unit(1), &els).unwrap());
        for e in &els {
            let a = positive_hull(e).approx_set(&s, w.stage).unwrap();
            assert!(a.intersect_box(w.witness.carrier()).unwrap().is_empty());
        }
    }

    #[test]
    fn tampered_witness_rejected() {
        let s = CantorSchedule::standard(1);
        let c = RingExpr::cantor(1);
        let mut w = find_uncovered_box(&s, &Aabb::unit(1), std::slice::from_ref(&c), 12)
            .unwrap()
            .witness()
            .unwrap()
            .clone();
        w.witness = OpenBox::interior_of(&iv(q(1, 8), q(5, 8))).unwrap();
        assert!(!w.verify(&s, &Aabb::unit(1), &[c]).unwrap());
    }

    #[test]
    fn needs_deeper_stage() {
        let s = CantorSchedule::standard(1);
        let tiny = iv(qi(0), q(1, 1 << 12));
        let r = find_uncovered_box(&s, &tiny, &[RingExpr::cantor(1)], 2).unwrap();
        assert_eq!(r, UncoveredSearch::NeedsDeeperStage { deepest: 2 });
    }

    #[test]
    fn self_cover() {
        let s = CantorSchedule::standard(1);
        let c = RingExpr::cantor(1);
        let cfg = SearchConfig { stage: 6, ..Default::default() };
        let r = outer_upper(&s, &CoverTarget::Expr(c.clone()), std::slice::from_ref(&c), &cfg).unwrap();
        assert_eq!(r.total(), Some(&(q(1, 2) + q(1, 128))));

        let left = c.clip_to_box(&iv(qi(0), q(3, 8))).unwrap();
        let r = outer_upper(&s, &CoverTarget::Expr(left.clone()), &[left], &cfg).unwrap();
        assert_eq!(r.total(), Some(&((q(1, 2) + q(1, 128)) / qi(2))));
    }

    #[test]
    fn clipped_pool_beats_whole() {
        let s = CantorSchedule::standard(1);
        let c = RingExpr::cantor(1);
        let left = c.clip_to_box(&iv(qi(0), q(1, 2))).unwrap();
        let cfg = SearchConfig { stage: 5, ..Default::default() };
        let r = outer_upper(&s, &CoverTarget::Expr(left), &[c], &cfg).unwrap();
        assert_eq!(r.total(), Some(&(s.stage_measure(5) / qi(2))));
    }

    #[test]
    fn box_target_is_infinite() {
        let s = CantorSchedule::standard(1);
        let pool = grid_pool(1, 3);
        let r = outer_upper(&s, &CoverTarget::Box(Aabb::unit(1)), &pool, &Default::default()).unwrap();
        match r {
            OuterUpper::Infinite { witness: Some(w), .. } => {
                assert!(w.verify(&s, &Aabb::unit(1), &pool).unwrap())
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn uncoverable_expr_target() {
        let s = CantorSchedule::standard(1);
        let t = RingExpr::clipped_translate(vec![q(1, 3)]);
        let r = outer_upper(&s, &CoverTarget::Expr(t), &[RingExpr::cantor(1)], &Default::default())
            .unwrap();
        assert!(matches!(r, OuterUpper::Infinite { witness: None, exhaustive: true, .. }));
    }

    #[test]
    fn cube_report_small() {
        let s = CantorSchedule::standard(1);
        let r = infinite_cube_report(&s, 4, 12).unwrap();
        assert_eq!((r.families, r.witnesses), (15, 15));
        let r = infinite_cube_report(&s, 0, 12).unwrap();
        assert_eq!((r.families, r.witnesses), (1, 1));
        let s2 = CantorSchedule::standard(2);
        let r = infinite_cube_report(&s2, 2, 12).unwrap();
        for row in &r.rows {
            let fam: Vec<RingExpr> = row.subset.iter().map(|&i| r.pool[i].clone()).collect();
            assert!(row.outcome.witness().unwrap().verify(&s2, &Aabb::unit(2), &fam).unwrap());
        }
    }
}
