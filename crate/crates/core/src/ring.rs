//! Symbolic elements of the ring generated by clipped Cantor translates
//! `(C^d + x) ∩ I`, their finite-stage evaluation, and certified measure
//! bounds.

use std::collections::HashMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cantor::CantorSchedule;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Aabb, BoxUnion};
use crate::rational::{serde_q, serde_qvec, Q};

/// Above this many distinct leaves the dependency analysis in
/// [`RingExpr::measure_bounds`] is skipped and every leaf is charged.
const MAX_TRUTH_TABLE_LEAVES: usize = 16;

/// Generator `(C^d + translation) ∩ clip`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    #[serde(rename = "x", with = "serde_qvec")]
    pub translation: Vec<Q>,
    pub clip: Aabb,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingExpr {
    Gen(Generator),
    Union(Box<RingExpr>, Box<RingExpr>),
    Diff(Box<RingExpr>, Box<RingExpr>),
    Inter(Box<RingExpr>, Box<RingExpr>),
}

/// Certified enclosure of the Lebesgue measure of a ring element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureBounds {
    #[serde(with = "serde_q")]
    pub lower: Q,
    #[serde(with = "serde_q")]
    pub upper: Q,
    pub stage: u32,
    pub leaf_count: usize,
}

impl MeasureBounds {
    pub fn exact(value: Q, stage: u32, leaf_count: usize) -> Self {
        MeasureBounds { lower: value.clone(), upper: value, stage, leaf_count }
    }

    pub fn width(&self) -> Q {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.lower <= *x && *x <= self.upper
    }

    pub fn midpoint(&self) -> Q {
        (&self.lower + &self.upper) / Q::from_integer(2.into())
    }

    pub fn intersects(&self, other: &MeasureBounds) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

impl RingExpr {
    pub fn gen(translation: Vec<Q>, clip: Aabb) -> Self {
        RingExpr::Gen(Generator { translation, clip })
    }

    /// `C^d ∩ [0,1)^d`.
    pub fn cantor(d: usize) -> Self {
        Self::gen(vec![Q::zero(); d], Aabb::unit(d))
    }

    /// `(C^d + x) ∩ [0,1)^d`.
    pub fn clipped_translate(x: Vec<Q>) -> Self {
        let d = x.len();
        Self::gen(x, Aabb::unit(d))
    }

    /// A generator with an empty clip box; denotes the empty set.
    pub fn empty(d: usize) -> Self {
        Self::gen(vec![Q::zero(); d], Aabb::cube(&vec![Q::zero(); d], &Q::zero()))
    }

    pub fn union(a: RingExpr, b: RingExpr) -> Self {
        RingExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn diff(a: RingExpr, b: RingExpr) -> Self {
        RingExpr::Diff(Box::new(a), Box::new(b))
    }

    pub fn inter(a: RingExpr, b: RingExpr) -> Self {
        RingExpr::Inter(Box::new(a), Box::new(b))
    }

    pub fn dim(&self) -> usize {
        match self {
            RingExpr::Gen(g) => g.translation.len(),
            RingExpr::Union(a, _) | RingExpr::Diff(a, _) | RingExpr::Inter(a, _) => a.dim(),
        }
    }

    /// Checks that every leaf has dimension `d` and a well-formed clip.
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            RingExpr::Gen(g) => {
                check_dim(d, g.translation.len())?;
                check_dim(d, g.clip.dim())?;
                g.clip.validate()
            }
            RingExpr::Union(a, b) | RingExpr::Diff(a, b) | RingExpr::Inter(a, b) => {
                a.validate(d)?;
                b.validate(d)
            }
        }
    }

    pub fn leaves(&self) -> Vec<&Generator> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Generator>) {
        match self {
            RingExpr::Gen(g) => out.push(g),
            RingExpr::Union(a, b) | RingExpr::Diff(a, b) | RingExpr::Inter(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            RingExpr::Gen(_) => 1,
            RingExpr::Union(a, b) | RingExpr::Diff(a, b) | RingExpr::Inter(a, b) => {
                a.leaf_count() + b.leaf_count()
            }
        }
    }

    /// No difference nodes: the denoted set is monotone in every leaf.
    pub fn is_monotone(&self) -> bool {
        match self {
            RingExpr::Gen(_) => true,
            RingExpr::Diff(..) => false,
            RingExpr::Union(a, b) | RingExpr::Inter(a, b) => a.is_monotone() && b.is_monotone(),
        }
    }

    /// Stage-`n` set: every `C^d` replaced by `A_n^d`, then evaluated exactly.
    pub fn approx_set(&self, s: &CantorSchedule, n: u32) -> Result<BoxUnion> {
        self.validate(s.d)?;
        self.eval(s, n, None)
    }

    fn eval(&self, s: &CantorSchedule, n: u32, window: Option<&Aabb>) -> Result<BoxUnion> {
        match self {
            RingExpr::Gen(g) => {
                let clip = match window {
                    Some(w) => g.clip.intersect(w)?,
                    None => g.clip.clone(),
                };
                s.leaf_approx(n, &g.translation, &clip)
            }
            RingExpr::Union(a, b) => a.eval(s, n, window)?.union(&b.eval(s, n, window)?),
            RingExpr::Inter(a, b) | RingExpr::Diff(a, b) => {
                let sa = a.eval(s, n, window)?;
                let Some(bbox) = sa.bounding_box() else {
                    return Ok(sa);
                };
                // only the part of b inside a's hull can matter
                let sb = b.eval(s, n, Some(&bbox))?;
                if matches!(self, RingExpr::Inter(..)) {
                    sa.intersect(&sb)
                } else {
                    sa.subtract(&sb)
                }
            }
        }
    }

    fn stage_measure(&self, s: &CantorSchedule, n: u32) -> Result<Q> {
        match self {
            RingExpr::Gen(g) => s.leaf_measure(n, &g.translation, &g.clip),
            _ => self.approx_set(s, n)?.measure(),
        }
    }

    /// Certified enclosure of `lambda(e)` from the stage-`n` approximation.
    ///
    /// Let `f` be the boolean formula over the distinct leaves. The true set and
    /// the stage set can only differ at points lying in the shell
    /// `(A_n^d + x) \ (C^d + x)` of some leaf on which `f` actually depends
    /// (flip the differing leaf memberships one at a time). Each shell has
    /// measure at most `min(delta_n, lambda(leaf stage set))`, and the sum of
    /// those over essential leaves is the error budget. For expressions
    /// without differences the stage set is an outer approximation, so the
    /// upper end needs no budget.
    pub fn measure_bounds(&self, s: &CantorSchedule, n: u32) -> Result<MeasureBounds> {
        self.validate(s.d)?;
        let approx = self.stage_measure(s, n)?;
        let err = self.error_budget(s, n)?;
        let lower = if approx > err { &approx - &err } else { Q::zero() };
        let upper = if self.is_monotone() { approx } else { approx + err };
        Ok(MeasureBounds { lower, upper, stage: n, leaf_count: self.leaf_count() })
    }

    fn error_budget(&self, s: &CantorSchedule, n: u32) -> Result<Q> {
        let delta = s.stage_defect(n);
        // distinct leaves, in first-occurrence order
        let mut index: HashMap<&Generator, usize> = HashMap::new();
        let mut distinct: Vec<&Generator> = Vec::new();
        for g in self.leaves() {
            index.entry(g).or_insert_with(|| {
                distinct.push(g);
                distinct.len() - 1
            });
        }
        let mut charge = Vec::with_capacity(distinct.len());
        for g in &distinct {
            let m = s.leaf_measure(n, &g.translation, &g.clip)?;
            charge.push(if m < delta { m } else { delta.clone() });
        }
        // leaves with empty stage sets are empty in the limit too: constant false
        let live: Vec<bool> = charge.iter().map(|c| !c.is_zero()).collect();
        let essential: Vec<bool> = if distinct.len() > MAX_TRUTH_TABLE_LEAVES {
            live.clone()
        } else {
            let k = distinct.len();
            let mut ess = vec![false; k];
            for mask in 0u32..(1u32 << k) {
                if (0..k).any(|i| !live[i] && mask & (1 << i) != 0) {
                    continue;
                }
                let base = self.truth(&index, mask);
                for i in 0..k {
                    if !live[i] || ess[i] || mask & (1 << i) != 0 {
                        continue;
                    }
                    if self.truth(&index, mask | (1 << i)) != base {
                        ess[i] = true;
                    }
                }
            }
            ess
        };
        Ok(charge
            .into_iter()
            .zip(essential)
            .filter(|(_, e)| *e)
            .fold(Q::zero(), |acc, (c, _)| acc + c))
    }

    fn truth(&self, index: &HashMap<&Generator, usize>, mask: u32) -> bool {
        match self {
            RingExpr::Gen(g) => mask & (1 << index[g]) != 0,
            RingExpr::Union(a, b) => a.truth(index, mask) || b.truth(index, mask),
            RingExpr::Inter(a, b) => a.truth(index, mask) && b.truth(index, mask),
            RingExpr::Diff(a, b) => a.truth(index, mask) && !b.truth(index, mask),
        }
    }

    /// Deepens the stage `n = 1, 2, ...` until the enclosure is at most `tol`
    /// wide.
    pub fn premeasure(&self, s: &CantorSchedule, tol: &Q) -> Result<MeasureBounds> {
        if *tol <= Q::zero() {
            return Err(Error::precondition("tolerance must be positive"));
        }
        self.validate(s.d)?;
        let max_stage = s.max_stage_bits() / s.d as u32;
        let mut best: Option<MeasureBounds> = None;
        for n in 1..=max_stage {
            let b = match self.measure_bounds(s, n) {
                Ok(b) => b,
                Err(e) if e.is_budget() => break,
                Err(e) => return Err(e),
            };
            if b.width() <= *tol {
                return Ok(b);
            }
            best = Some(b);
        }
        Err(Error::ToleranceBudget {
            stage: best.as_ref().map_or(0, |b| b.stage),
            best: best.map(Box::new),
        })
    }

    /// Pushes `∩ I` down to the leaves; the result denotes `e ∩ I` and has the
    /// same number of leaves.
    pub fn clip_to_box(&self, i: &Aabb) -> Result<RingExpr> {
        check_dim(self.dim(), i.dim())?;
        Ok(match self {
            RingExpr::Gen(g) => RingExpr::gen(g.translation.clone(), g.clip.intersect(i)?),
            RingExpr::Union(a, b) => RingExpr::union(a.clip_to_box(i)?, b.clip_to_box(i)?),
            RingExpr::Diff(a, b) => RingExpr::Diff(Box::new(a.clip_to_box(i)?), b.clone()),
            RingExpr::Inter(a, b) => RingExpr::Inter(Box::new(a.clip_to_box(i)?), b.clone()),
        })
    }
}

/// Levels `R_1, ..., R_n` of the inductive construction over a generator pool.
#[derive(Clone, Debug, Serialize)]
pub struct RnReport {
    pub levels: Vec<Vec<RingExpr>>,
    /// Candidates dropped at each level because their stage set at
    /// `reference_stage` matched an earlier element.
    pub merged: Vec<usize>,
    pub reference_stage: u32,
    pub pair_evaluations: usize,
}

impl RnReport {
    /// `R_n`.
    pub fn last(&self) -> &[RingExpr] {
        self.levels.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

pub const DEFAULT_REFERENCE_STAGE: u32 = 4;

/// `R_1 = pool`, `R_{k+1} = {A ∪ B, A \ B : A, B ∈ R_k}`, deduplicated by the
/// canonical stage set at `reference_stage`.
///
/// `R_k` is listed first inside `R_{k+1}` (as `A ∪ A = A`), so the levels are
/// increasing. Sets that differ only below the reference resolution merge.
pub fn generate_rn(
    s: &CantorSchedule,
    pool: &[RingExpr],
    n: u32,
    reference_stage: u32,
    budget: usize,
) -> Result<RnReport> {
    if n == 0 {
        return Err(Error::precondition("levels start at n = 1"));
    }
    for e in pool {
        e.validate(s.d)?;
    }
    let mut seen: HashMap<BoxUnion, usize> = HashMap::new();
    let mut level: Vec<(RingExpr, BoxUnion)> = Vec::new();
    let mut merged = vec![0usize];
    for e in pool {
        let a = e.approx_set(s, reference_stage)?;
        if seen.contains_key(&a) {
            merged[0] += 1;
            continue;
        }
        seen.insert(a.clone(), level.len());
        level.push((e.clone(), a));
    }
    let mut levels = vec![level.iter().map(|(e, _)| e.clone()).collect::<Vec<_>>()];
    let mut evals = 0usize;
    for _ in 1..n {
        let mut next = level.clone();
        let mut dropped = 0;
        for (ea, sa) in &level {
            for (eb, sb) in &level {
                evals += 2;
                if evals > budget {
                    return Err(Error::Budget(format!(
                        "R_n enumeration needs more than {budget} pair evaluations"
                    )));
                }
                for (expr, set) in [
                    (RingExpr::union(ea.clone(), eb.clone()), sa.union(sb)?),
                    (RingExpr::diff(ea.clone(), eb.clone()), sa.subtract(sb)?),
                ] {
                    if seen.contains_key(&set) {
                        dropped += 1;
                    } else {
                        seen.insert(set.clone(), next.len());
                        next.push((expr, set));
                    }
                }
            }
        }
        merged.push(dropped);
        levels.push(next.iter().map(|(e, _)| e.clone()).collect());
        level = next;
    }
    Ok(RnReport { levels, merged, reference_stage, pair_evaluations: evals })
}

/// Exact splitting of a stage set by an axis half-space.
#[derive(Clone, Debug, Serialize)]
pub struct SplitReport {
    pub stage: u32,
    pub half_space: Aabb,
    pub complement: Aabb,
    #[serde(with = "serde_q")]
    pub whole: Q,
    #[serde(with = "serde_q")]
    pub inside: Q,
    #[serde(with = "serde_q")]
    pub outside: Q,
    pub holds: bool,
}

/// Checks `lambda(S_n(e)) = lambda(S_n(e ∩ A)) + lambda(S_n(e ∩ A^c))` for a
/// half-space `A`.
pub fn split_identity_check(
    s: &CantorSchedule,
    e: &RingExpr,
    a: &Aabb,
    n: u32,
) -> Result<SplitReport> {
    let complement = a
        .half_space_complement()
        .ok_or_else(|| Error::precondition("split needs an axis half-space (one finite bound)"))?;
    let whole = e.approx_set(s, n)?.measure()?;
    let inside = e.clip_to_box(a)?.approx_set(s, n)?.measure()?;
    let outside = e.clip_to_box(&complement)?.approx_set(s, n)?.measure()?;
    let holds = whole == &inside + &outside;
    Ok(SplitReport { stage: n, half_space: a.clone(), complement, whole, inside, outside, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn iv(a: Q, b: Q) -> Aabb {
        Aabb::from_q(vec![a], vec![b]).unwrap()
    }

    #[test]
    fn stage_one_set() {
        let s = CantorSchedule::standard(1);
        let g = RingExpr::cantor(1);
        assert_eq!(
            g.approx_set(&s, 1).unwrap().boxes(),
            vec![iv(qi(0), q(3, 8)), iv(q(5, 8), qi(1))]
        );
    }

    #[test]
    fn self_difference_is_empty() {
        let s = CantorSchedule::standard(1);
        let g = RingExpr::cantor(1);
        let e = RingExpr::diff(g.clone(), g);
        for n in 0..6 {
            assert!(e.approx_set(&s, n).unwrap().is_empty());
            let b = e.measure_bounds(&s, n).unwrap();
            assert_eq!((b.lower, b.upper), (qi(0), qi(0)));
        }
    }

    #[test]
    fn disjoint_translates_add() {
        let s = CantorSchedule::standard(1);
        let g = RingExpr::cantor(1);
        let h = RingExpr::gen(vec![qi(2)], iv(qi(2), qi(3)));
        let u = RingExpr::union(g, h);
        for n in 0..5 {
            assert_eq!(
                u.approx_set(&s, n).unwrap().measure().unwrap(),
                s.stage_measure(n) * qi(2)
            );
        }
    }

    #[test]
    fn bounds_example() {
        let s = CantorSchedule::standard(1);
        let b = RingExpr::cantor(1).measure_bounds(&s, 3).unwrap();
        assert_eq!(b.lower, q(1, 2));
        assert_eq!(b.upper, q(9, 16));
        assert_eq!(b.leaf_count, 1);
    }

    #[test]
    fn empty_clip_bounds() {
        let s = CantorSchedule::standard(2);
        let b = RingExpr::empty(2).measure_bounds(&s, 2).unwrap();
        assert_eq!((b.lower, b.upper), (qi(0), qi(0)));
    }

    #[test]
    fn premeasure_of_c() {
        let s = CantorSchedule::standard(1);
        let tol = q(1, 1024);
        let b = RingExpr::cantor(1).premeasure(&s, &tol).unwrap();
        assert!(b.width() <= tol);
        assert!(b.contains(&q(1, 2)));
        assert_eq!(b.stage, 9);

        let b = RingExpr::empty(1).premeasure(&s, &tol).unwrap();
        assert_eq!((b.lower, b.upper), (qi(0), qi(0)));
        assert!(RingExpr::cantor(1).premeasure(&s, &qi(0)).is_err());
    }

    #[test]
    fn premeasure_budget_carries_best() {
        let s = CantorSchedule::standard(1).with_max_stage_bits(4);
        match RingExpr::cantor(1).premeasure(&s, &q(1, 1 << 20)) {
            Err(Error::ToleranceBudget { stage, best: Some(b) }) => {
                assert_eq!(stage, 4);
                assert!(b.contains(&q(1, 2)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn clip_rules() {
        let g = RingExpr::cantor(1);
        let half = iv(qi(0), q(1, 2));
        assert_eq!(g.clip_to_box(&half).unwrap(), RingExpr::gen(vec![qi(0)], half.clone()));
        let e = RingExpr::diff(g.clone(), RingExpr::gen(vec![q(1, 4)], Aabb::unit(1)));
        let c = e.clip_to_box(&half).unwrap();
        assert_eq!(c.leaf_count(), e.leaf_count());
        let s = CantorSchedule::standard(1);
        for n in 0..5 {
            assert_eq!(
                c.approx_set(&s, n).unwrap(),
                e.approx_set(&s, n).unwrap().intersect_box(&half).unwrap()
            );
        }
    }

    #[test]
    fn rn_single_generator() {
        let s = CantorSchedule::standard(1);
        let g = RingExpr::cantor(1);
        let r1 = generate_rn(&s, std::slice::from_ref(&g), 1, 4, 1000).unwrap();
        assert_eq!(r1.last(), std::slice::from_ref(&g));
        let r2 = generate_rn(&s, std::slice::from_ref(&g), 2, 4, 1000).unwrap();
        assert_eq!(r2.last(), &[g.clone(), RingExpr::diff(g.clone(), g)]);
        assert_eq!(r2.merged, vec![0, 1]);
    }

    #[test]
    fn rn_disjoint_pair() {
        let s = CantorSchedule::standard(1);
        let g1 = RingExpr::gen(vec![qi(0)], iv(qi(0), q(3, 8)));
        let g2 = RingExpr::gen(vec![qi(0)], iv(q(5, 8), qi(1)));
        let r = generate_rn(&s, &[g1.clone(), g2.clone()], 2, 4, 1000).unwrap();
        let u = RingExpr::union(g1.clone(), g2.clone());
        assert!(r.last().contains(&u));
        assert_eq!(
            u.approx_set(&s, 4).unwrap().measure().unwrap(),
            g1.approx_set(&s, 4).unwrap().measure().unwrap()
                + g2.approx_set(&s, 4).unwrap().measure().unwrap()
        );
        assert!(generate_rn(&s, &[g1, g2], 3, 4, 10).is_err());
    }

    #[test]
    fn split_examples() {
        let s = CantorSchedule::standard(1);
        let a = Aabb::below(1, 0, q(1, 2));
        for n in 0..6 {
            let r = split_identity_check(&s, &RingExpr::cantor(1), &a, n).unwrap();
            assert!(r.holds);
            assert_eq!(r.inside, r.outside);
            assert_eq!(r.inside, s.stage_measure(n) / qi(2));
        }
        let r = split_identity_check(&s, &RingExpr::empty(1), &a, 3).unwrap();
        assert!(r.holds && r.whole.is_zero());
        assert!(split_identity_check(&s, &RingExpr::cantor(1), &Aabb::unit(1), 2).is_err());
    }

    #[test]
    fn json_shape() {
        let e = RingExpr::union(RingExpr::cantor(1), RingExpr::empty(1));
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.starts_with(r#"{"union":[{"gen":{"x":["0/1"],"clip":{"lo":["0/1"],"hi":["1/1"]}}}"#));
        let back: RingExpr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }
}
