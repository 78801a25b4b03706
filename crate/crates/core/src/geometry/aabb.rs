use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::bound::Bound;
use crate::error::{check_dim, Error, Result};
use crate::rational::Q;

/// Axis-aligned box `[lo_1, hi_1) x ... x [lo_d, hi_d)`.
///
/// Half-open is the algebra carrier everywhere in the crate. Sides may be
/// unbounded through [`Bound::NegInf`] / [`Bound::PosInf`]; such boxes are only
/// meaningful as clipping regions (half-spaces) and have no volume.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: Vec<Bound>,
    pub hi: Vec<Bound>,
}

impl Aabb {
    pub fn new(lo: Vec<Bound>, hi: Vec<Bound>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        let b = Aabb { lo, hi };
        b.validate()?;
        Ok(b)
    }

    pub fn from_q(lo: Vec<Q>, hi: Vec<Q>) -> Result<Self> {
        Self::new(
            lo.into_iter().map(Bound::Finite).collect(),
            hi.into_iter().map(Bound::Finite).collect(),
        )
    }

    /// `[0, 1)^d`.
    pub fn unit(d: usize) -> Self {
        Self::cube(&vec![Q::zero(); d], &Q::one())
    }

    pub fn cube(corner: &[Q], side: &Q) -> Self {
        Aabb {
            lo: corner.iter().map(Bound::from).collect(),
            hi: corner.iter().map(|c| Bound::Finite(c + side)).collect(),
        }
    }

    /// The whole space.
    pub fn everything(d: usize) -> Self {
        Aabb {
            lo: vec![Bound::NegInf; d],
            hi: vec![Bound::PosInf; d],
        }
    }

    /// `{x : x_axis < t}`.
    pub fn below(d: usize, axis: usize, t: Q) -> Self {
        let mut b = Self::everything(d);
        b.hi[axis] = Bound::Finite(t);
        b
    }

    /// `{x : x_axis >= t}`.
    pub fn at_or_above(d: usize, axis: usize, t: Q) -> Self {
        let mut b = Self::everything(d);
        b.lo[axis] = Bound::Finite(t);
        b
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.lo.len(), self.hi.len())?;
        for (i, (l, h)) in self.lo.iter().zip(&self.hi).enumerate() {
            if l > h {
                return Err(Error::precondition(format!(
                    "box side {i} has lo {l} > hi {h}"
                )));
            }
            if *l == Bound::PosInf || *h == Bound::NegInf {
                return Err(Error::precondition(format!(
                    "box side {i} is [{l}, {h}), which is empty by construction"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l >= h)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(Bound::is_finite)
    }

    /// Every side finite with positive length.
    pub fn is_solid(&self) -> bool {
        self.is_bounded() && !self.is_empty()
    }

    /// Side lengths of a bounded box.
    pub fn sides(&self) -> Result<Vec<Q>> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| match (l, h) {
                (Bound::Finite(l), Bound::Finite(h)) => Ok(if h > l { h - l } else { Q::zero() }),
                _ => Err(Error::Unbounded("box has an infinite side".into())),
            })
            .collect()
    }

    /// Lebesgue measure. Infinite sides are an error even when another side is
    /// degenerate, so that rationals stay total.
    pub fn volume(&self) -> Result<Q> {
        Ok(self.sides()?.iter().fold(Q::one(), |acc, s| acc * s))
    }

    pub fn intersect(&self, other: &Aabb) -> Result<Aabb> {
        check_dim(self.dim(), other.dim())?;
        let lo: Vec<Bound> = self
            .lo
            .iter()
            .zip(&other.lo)
            .map(|(a, b)| a.max(b).clone())
            .collect();
        let hi: Vec<Bound> = self
            .hi
            .iter()
            .zip(&other.hi)
            .zip(&lo)
            .map(|((a, b), l)| a.min(b).max(l).clone())
            .collect();
        Ok(Aabb { lo, hi })
    }

    pub fn translate(&self, v: &[Q]) -> Result<Aabb> {
        check_dim(self.dim(), v.len())?;
        Ok(Aabb {
            lo: self.lo.iter().zip(v).map(|(b, t)| b.shift(t)).collect(),
            hi: self.hi.iter().zip(v).map(|(b, t)| b.shift(t)).collect(),
        })
    }

    pub fn contains_point(&self, x: &[Q]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| {
                let xb = Bound::Finite(x.clone());
                *l <= xb && xb < *h
            })
    }

    /// Set inclusion for half-open boxes.
    pub fn contains_box(&self, other: &Aabb) -> bool {
        other.is_empty()
            || (self.dim() == other.dim()
                && (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i]))
    }

    /// If the box is an axis half-space (exactly one finite bound), returns its
    /// axis, threshold, and whether it is the upper part `{x_axis >= t}`.
    pub fn as_half_space(&self) -> Option<(usize, Q, bool)> {
        let mut found = None;
        for i in 0..self.dim() {
            for (b, upper) in [(&self.lo[i], true), (&self.hi[i], false)] {
                if let Bound::Finite(t) = b {
                    if found.is_some() {
                        return None;
                    }
                    found = Some((i, t.clone(), upper));
                }
            }
        }
        found
    }

    /// Complement of a half-space, which is again a half-space.
    pub fn half_space_complement(&self) -> Option<Aabb> {
        let (axis, t, upper) = self.as_half_space()?;
        Some(if upper {
            Aabb::below(self.dim(), axis, t)
        } else {
            Aabb::at_or_above(self.dim(), axis, t)
        })
    }
}

/// Open box `(lo_1, hi_1) x ... x (lo_d, hi_d)` with strictly positive finite
/// sides, used by topological certificates.
///
/// An open box misses a closed box iff the half-open boxes with the same
/// endpoints are disjoint (per coordinate, `(p,q)` misses `[a,b]` iff `q <= a`
/// or `b <= p`), so disjointness from closed stage sets is decided exactly by
/// half-open box algebra on [`OpenBox::carrier`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Aabb", into = "Aabb")]
pub struct OpenBox(Aabb);

impl OpenBox {
    pub fn new(b: Aabb) -> Result<Self> {
        if !b.is_solid() {
            return Err(Error::precondition(
                "open box needs finite sides of positive length",
            ));
        }
        Ok(OpenBox(b))
    }

    /// The interior of a solid box.
    pub fn interior_of(b: &Aabb) -> Result<Self> {
        Self::new(b.clone())
    }

    pub fn carrier(&self) -> &Aabb {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn lo(&self, i: usize) -> &Q {
        self.0.lo[i].finite().expect("open box is bounded")
    }

    pub fn hi(&self, i: usize) -> &Q {
        self.0.hi[i].finite().expect("open box is bounded")
    }

    /// Pulls every side in by `fraction` of its length at both ends.
    pub fn shrink(&self, fraction: &Q) -> OpenBox {
        debug_assert!(fraction.is_positive() && fraction * Q::from_integer(2.into()) < Q::one());
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let (l, h) = (self.lo(i), self.hi(i));
            let m = (h - l) * fraction;
            lo.push(Bound::Finite(l + &m));
            hi.push(Bound::Finite(h - &m));
        }
        OpenBox(Aabb { lo, hi })
    }

    /// Replaces side `i` with `(lo, hi)`, which must have positive length.
    pub fn with_side(&self, i: usize, lo: Q, hi: Q) -> Result<OpenBox> {
        let mut b = self.0.clone();
        b.lo[i] = Bound::Finite(lo);
        b.hi[i] = Bound::Finite(hi);
        OpenBox::new(b)
    }

    /// Closure of `self` lies in `outer` (as open sets).
    pub fn closure_within(&self, outer: &OpenBox) -> bool {
        self.dim() == outer.dim()
            && (0..self.dim()).all(|i| outer.lo(i) < self.lo(i) && self.hi(i) < outer.hi(i))
    }
}

impl TryFrom<Aabb> for OpenBox {
    type Error = Error;

    fn try_from(b: Aabb) -> Result<Self> {
        OpenBox::new(b)
    }
}

impl From<OpenBox> for Aabb {
    fn from(b: OpenBox) -> Aabb {
        b.0
    }
}
