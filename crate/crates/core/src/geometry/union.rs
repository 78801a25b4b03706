//! Canonical finite unions of half-open boxes.
//!
//! A union is stored as a recursive slab decomposition: along the first
//! coordinate the set is cut into maximal slabs on which the cross-section is
//! constant, and every cross-section is itself a canonical union one dimension
//! down. Maximality makes the decomposition a function of the set alone, so
//! structural equality is set equality.

use std::sync::Arc;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use super::aabb::Aabb;
use super::bound::Bound;
use crate::error::{check_dim, Error, Result};
use crate::rational::Q;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
struct Slabs(Vec<Slab>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Slab {
    lo: Bound,
    hi: Bound,
    // empty on the last coordinate, non-empty otherwise
    section: Arc<Slabs>,
}

static NOTHING: Slabs = Slabs(Vec::new());

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SetOp {
    Union,
    Inter,
    Diff,
}

impl SetOp {
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            SetOp::Union => a || b,
            SetOp::Inter => a && b,
            SetOp::Diff => a && !b,
        }
    }
}

impl Slabs {
    fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn push_merged(&mut self, lo: Bound, hi: Bound, section: Slabs) {
        if let Some(last) = self.0.last_mut() {
            if last.hi == lo && *last.section == section {
                last.hi = hi;
                return;
            }
        }
        self.0.push(Slab { lo, hi, section: Arc::new(section) });
    }

    fn single(b: &Aabb, axis: usize) -> Slabs {
        if axis == b.dim() {
            return Slabs::default();
        }
        Slabs(vec![Slab {
            lo: b.lo[axis].clone(),
            hi: b.hi[axis].clone(),
            section: Arc::new(Slabs::single(b, axis + 1)),
        }])
    }

    fn combine(a: &Slabs, b: &Slabs, depth: usize, op: SetOp) -> Slabs {
        if a.is_empty() || b.is_empty() {
            return match op {
                SetOp::Union => if a.is_empty() { b.clone() } else { a.clone() },
                SetOp::Inter => Slabs::default(),
                SetOp::Diff => a.clone(),
            };
        }
        if op == SetOp::Inter
            && (a.0.last().unwrap().hi <= b.0[0].lo || b.0.last().unwrap().hi <= a.0[0].lo)
        {
            return Slabs::default();
        }
        let mut cuts: Vec<&Bound> = Vec::with_capacity(2 * (a.0.len() + b.0.len()));
        for s in a.0.iter().chain(&b.0) {
            cuts.push(&s.lo);
            cuts.push(&s.hi);
        }
        cuts.sort_unstable();
        cuts.dedup();

        let mut out = Slabs::default();
        let (mut ia, mut ib) = (0, 0);
        for w in cuts.windows(2) {
            let (x, y) = (w[0], w[1]);
            while ia < a.0.len() && a.0[ia].hi <= *x {
                ia += 1;
            }
            while ib < b.0.len() && b.0[ib].hi <= *x {
                ib += 1;
            }
            // no cut lies strictly inside (x, y), so a slab starting at or
            // before x covers all of [x, y)
            let sa = a.0.get(ia).filter(|s| s.lo <= *x).map(|s| &*s.section);
            let sb = b.0.get(ib).filter(|s| s.lo <= *x).map(|s| &*s.section);
            if depth == 1 {
                if op.apply(sa.is_some(), sb.is_some()) {
                    out.push_merged(x.clone(), y.clone(), Slabs::default());
                }
                continue;
            }
            if sa.is_none() && sb.is_none() {
                continue;
            }
            let section = Slabs::combine(
                sa.unwrap_or(&NOTHING),
                sb.unwrap_or(&NOTHING),
                depth - 1,
                op,
            );
            if !section.is_empty() {
                out.push_merged(x.clone(), y.clone(), section);
            }
        }
        out
    }

    fn measure(&self, depth: usize) -> Result<Q> {
        let mut total = Q::zero();
        // runs of slabs with equal sections share one inner measure
        let mut run: Option<(&Arc<Slabs>, Q)> = None;
        let mut run_len = Q::zero();
        for s in &self.0 {
            let len = match (&s.lo, &s.hi) {
                (Bound::Finite(l), Bound::Finite(h)) => h - l,
                _ => return Err(Error::Unbounded("union has an unbounded component".into())),
            };
            if depth == 1 {
                total += len;
                continue;
            }
            match &run {
                Some((sec, _)) if *sec == &s.section => run_len += len,
                _ => {
                    if let Some((_, inner)) = run.take() {
                        total += &run_len * inner;
                    }
                    run = Some((&s.section, s.section.measure(depth - 1)?));
                    run_len = len;
                }
            }
        }
        if let Some((_, inner)) = run {
            total += run_len * inner;
        }
        Ok(total)
    }

    fn translate(&self, v: &[Q]) -> Slabs {
        let t = &v[0];
        Slabs(
            self.0
                .iter()
                .map(|s| Slab {
                    lo: s.lo.shift(t),
                    hi: s.hi.shift(t),
                    section: Arc::new(if v.len() > 1 { s.section.translate(&v[1..]) } else { Slabs::default() }),
                })
                .collect(),
        )
    }

    fn flatten(&self, depth: usize, prefix: &mut Vec<(Bound, Bound)>, out: &mut Vec<Aabb>) {
        for s in &self.0 {
            prefix.push((s.lo.clone(), s.hi.clone()));
            if depth == 1 {
                out.push(Aabb {
                    lo: prefix.iter().map(|p| p.0.clone()).collect(),
                    hi: prefix.iter().map(|p| p.1.clone()).collect(),
                });
            } else {
                s.section.flatten(depth - 1, prefix, out);
            }
            prefix.pop();
        }
    }

    fn count(&self, depth: usize) -> usize {
        if depth == 1 {
            self.0.len()
        } else {
            self.0.iter().map(|s| s.section.count(depth - 1)).sum()
        }
    }

    fn contains(&self, x: &[Q]) -> bool {
        let xb = Bound::Finite(x[0].clone());
        let idx = self.0.partition_point(|s| s.hi <= xb);
        match self.0.get(idx) {
            Some(s) if s.lo <= xb => x.len() == 1 || s.section.contains(&x[1..]),
            _ => false,
        }
    }

    fn extent(&self, axis: usize, acc: &mut [(Bound, Bound)]) {
        if let (Some(first), Some(last)) = (self.0.first(), self.0.last()) {
            let (lo, hi) = &mut acc[axis];
            if first.lo < *lo {
                *lo = first.lo.clone();
            }
            if last.hi > *hi {
                *hi = last.hi.clone();
            }
        }
        if axis + 1 < acc.len() {
            for s in &self.0 {
                s.section.extent(axis + 1, acc);
            }
        }
    }

    fn well_formed(&self, depth: usize) -> bool {
        for (i, s) in self.0.iter().enumerate() {
            if s.lo >= s.hi {
                return false;
            }
            if depth == 1 {
                if !s.section.is_empty() {
                    return false;
                }
            } else if s.section.is_empty() || !s.section.well_formed(depth - 1) {
                return false;
            }
            if let Some(next) = self.0.get(i + 1) {
                if next.lo < s.hi || (next.lo == s.hi && next.section == s.section) {
                    return false;
                }
            }
        }
        true
    }
}

/// Finite union of half-open boxes in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoxUnion {
    dim: usize,
    slabs: Slabs,
}

impl BoxUnion {
    pub fn empty(dim: usize) -> Self {
        BoxUnion { dim, slabs: Slabs::default() }
    }

    pub fn from_box(b: &Aabb) -> Self {
        if b.is_empty() {
            return Self::empty(b.dim());
        }
        BoxUnion { dim: b.dim(), slabs: Slabs::single(b, 0) }
    }

    /// Canonicalizes an arbitrary (possibly overlapping) list of boxes.
    pub fn from_boxes(dim: usize, boxes: &[Aabb]) -> Result<Self> {
        for b in boxes {
            check_dim(dim, b.dim())?;
        }
        let mut parts: Vec<BoxUnion> = boxes
            .iter()
            .filter(|b| !b.is_empty())
            .map(BoxUnion::from_box)
            .collect();
        if parts.is_empty() {
            return Ok(Self::empty(dim));
        }
        // balanced reduction keeps intermediate unions small
        while parts.len() > 1 {
            let mut next = Vec::with_capacity(parts.len().div_ceil(2));
            let mut it = parts.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a.union(&b)?),
                    None => next.push(a),
                }
            }
            parts = next;
        }
        Ok(parts.pop().unwrap())
    }

    /// Cartesian product of one-dimensional unions, each given as a list of
    /// half-open intervals `[a, b)` in any order.
    pub fn product(factors: &[Vec<(Q, Q)>]) -> Self {
        let dim = factors.len();
        let mut canon: Vec<Slabs> = Vec::with_capacity(dim);
        for f in factors {
            let separated = f.iter().all(|(a, b)| a < b)
                && f.windows(2).all(|w| w[0].1 < w[1].0);
            let slabs = if separated {
                Slabs(
                    f.iter()
                        .map(|(a, b)| Slab { lo: a.into(), hi: b.into(), section: Arc::default() })
                        .collect(),
                )
            } else {
                let boxes: Vec<Aabb> = f
                    .iter()
                    .map(|(a, b)| Aabb { lo: vec![a.into()], hi: vec![b.into()] })
                    .collect();
                BoxUnion::from_boxes(1, &boxes).expect("one-dimensional factors").slabs
            };
            if slabs.is_empty() {
                return Self::empty(dim);
            }
            canon.push(slabs);
        }
        let mut acc = Slabs::default();
        for (axis, f) in canon.into_iter().enumerate().rev() {
            if axis + 1 == dim {
                acc = f;
            } else {
                let shared = Arc::new(acc);
                acc = Slabs(
                    f.0.into_iter()
                        .map(|s| Slab { lo: s.lo, hi: s.hi, section: shared.clone() })
                        .collect(),
                );
            }
        }
        BoxUnion { dim, slabs: acc }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.slabs.is_empty()
    }

    /// Number of boxes in the canonical decomposition.
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.slabs.count(self.dim)
        }
    }

    /// Boxes in canonical (lexicographic by `lo`) order.
    pub fn boxes(&self) -> Vec<Aabb> {
        let mut out = Vec::new();
        if self.dim > 0 {
            self.slabs.flatten(self.dim, &mut Vec::with_capacity(self.dim), &mut out);
        }
        out
    }

    fn op(&self, other: &BoxUnion, op: SetOp) -> Result<BoxUnion> {
        check_dim(self.dim, other.dim)?;
        Ok(BoxUnion {
            dim: self.dim,
            slabs: Slabs::combine(&self.slabs, &other.slabs, self.dim, op),
        })
    }

    pub fn union(&self, other: &BoxUnion) -> Result<BoxUnion> {
        self.op(other, SetOp::Union)
    }

    pub fn intersect(&self, other: &BoxUnion) -> Result<BoxUnion> {
        self.op(other, SetOp::Inter)
    }

    pub fn subtract(&self, other: &BoxUnion) -> Result<BoxUnion> {
        self.op(other, SetOp::Diff)
    }

    pub fn intersect_box(&self, b: &Aabb) -> Result<BoxUnion> {
        self.intersect(&BoxUnion::from_box(b))
    }

    pub fn is_subset_of(&self, other: &BoxUnion) -> Result<bool> {
        Ok(self.subtract(other)?.is_empty())
    }

    pub fn is_disjoint_from(&self, other: &BoxUnion) -> Result<bool> {
        Ok(self.intersect(other)?.is_empty())
    }

    pub fn translate(&self, v: &[Q]) -> Result<BoxUnion> {
        check_dim(self.dim, v.len())?;
        if self.is_empty() {
            return Ok(self.clone());
        }
        Ok(BoxUnion { dim: self.dim, slabs: self.slabs.translate(v) })
    }

    /// Lebesgue measure; exact.
    pub fn measure(&self) -> Result<Q> {
        if self.dim == 0 {
            return Ok(Q::zero());
        }
        self.slabs.measure(self.dim)
    }

    pub fn contains_point(&self, x: &[Q]) -> bool {
        x.len() == self.dim && self.dim > 0 && self.slabs.contains(x)
    }

    /// Smallest box containing the union, `None` when empty.
    pub fn bounding_box(&self) -> Option<Aabb> {
        if self.is_empty() {
            return None;
        }
        let mut acc = vec![(Bound::PosInf, Bound::NegInf); self.dim];
        self.slabs.extent(0, &mut acc);
        Some(Aabb {
            lo: acc.iter().map(|p| p.0.clone()).collect(),
            hi: acc.iter().map(|p| p.1.clone()).collect(),
        })
    }

    /// Checks the canonical-form invariants (sorted, disjoint, maximal slabs).
    pub fn is_canonical(&self) -> bool {
        self.dim == 0 && self.is_empty() || self.slabs.well_formed(self.dim)
    }

    /// Pairwise disjointness of the flattened boxes, checked directly.
    pub fn boxes_pairwise_disjoint(&self) -> bool {
        let bs = self.boxes();
        for i in 0..bs.len() {
            for j in i + 1..bs.len() {
                match bs[i].intersect(&bs[j]) {
                    Ok(x) if x.is_empty() => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

impl Serialize for BoxUnion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.boxes().serialize(s)
    }
}
