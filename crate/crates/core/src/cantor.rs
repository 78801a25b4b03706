//! Symmetric fat Cantor sets with geometric removal rates.
//!
//! Stage `k` removes an open middle interval of length `r_k = c * rho^k` from
//! each of the `2^(k-1)` closed intervals surviving stage `k-1`, starting from
//! `[0, 1]`. Every stage-`k` interval has the same length
//! `l_k = (l_{k-1} - r_k) / 2`. In `d` dimensions the set is the `d`-fold
//! product of the one-dimensional set.
//!
//! Endpoints of a surviving interval are never removed later: a middle removal
//! only deletes points strictly inside an interval, and both endpoints of an
//! interval are endpoints of one of its two children. So a point that is an
//! endpoint at some stage lies in the limit set.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Aabb, Bound, BoxUnion, OpenBox};
use crate::rational::{pow2, pow_q, q, qi, serde_q, serde_qvec, Q};

/// Default explosion cap: materialized stage sets have at most `2^24` boxes.
pub const DEFAULT_MAX_STAGE_BITS: u32 = 24;

#[derive(Deserialize)]
struct ScheduleRepr {
    d: usize,
    #[serde(with = "serde_q")]
    c: Q,
    #[serde(with = "serde_q")]
    rho: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr")]
pub struct CantorSchedule {
    pub d: usize,
    #[serde(with = "serde_q")]
    pub c: Q,
    #[serde(with = "serde_q")]
    pub rho: Q,
    #[serde(skip)]
    max_stage_bits: u32,
}

impl TryFrom<ScheduleRepr> for CantorSchedule {
    type Error = Error;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        CantorSchedule::new(r.d, r.c, r.rho)
    }
}

/// Outcome of the budgeted membership test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Membership {
    /// Every coordinate is an endpoint by `stage`.
    In { stage: u32 },
    /// Some coordinate sits in a gap removed at `stage`.
    Out { stage: u32 },
    Unknown { cap: u32 },
}

/// Open box shown disjoint from `(stage_approx(stage) + translation) ∩ clip`,
/// hence from `(C^d + translation) ∩ clip`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub stage: u32,
    #[serde(rename = "box")]
    pub witness: OpenBox,
    #[serde(rename = "t", with = "serde_qvec")]
    pub translation: Vec<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<Aabb>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GapSearch {
    Found(GapCertificate),
    NeedsDeeperStage { deepest: u32 },
}

impl CantorSchedule {
    pub fn new(d: usize, c: Q, rho: Q) -> Result<Self> {
        let s = CantorSchedule { d, c, rho, max_stage_bits: DEFAULT_MAX_STAGE_BITS };
        s.validate()?;
        Ok(s)
    }

    /// `c = 1`, `rho = 1/4`: limit measure `1/2` per factor.
    pub fn standard(d: usize) -> Self {
        Self::new(d, qi(1), q(1, 4)).expect("standard schedule is valid")
    }

    pub fn with_max_stage_bits(mut self, bits: u32) -> Self {
        self.max_stage_bits = bits;
        self
    }

    pub fn max_stage_bits(&self) -> u32 {
        self.max_stage_bits
    }

    /// Checks positivity, `2 rho < 1` and `c rho / (1 - 2 rho) < 1`.
    ///
    /// Feasibility of every middle removal (`l_k > r_{k+1}`) follows: with
    /// `L > 0` the limit measure, `2^k l_k - 2^k r_{k+1}
    /// = L + c rho (2 rho)^k (1/(1 - 2 rho) - 1) > 0`.
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::precondition("dimension must be positive"));
        }
        if self.c <= Q::zero() || self.rho <= Q::zero() {
            return Err(Error::precondition("c and rho must be positive"));
        }
        if &self.rho * qi(2) >= Q::one() {
            return Err(Error::precondition("need 2*rho < 1"));
        }
        if self.removed_total() >= Q::one() {
            return Err(Error::precondition(
                "total removed length c*rho/(1-2*rho) must be < 1",
            ));
        }
        Ok(())
    }

    fn removed_total(&self) -> Q {
        &self.c * &self.rho / (Q::one() - &self.rho * qi(2))
    }

    /// `r_k = c rho^k`, `k >= 1`.
    pub fn removal(&self, k: u32) -> Q {
        &self.c * pow_q(&self.rho, k)
    }

    /// `[l_0, ..., l_n]`.
    pub fn lengths(&self, n: u32) -> Vec<Q> {
        let mut out = Vec::with_capacity(n as usize + 1);
        out.push(Q::one());
        for k in 1..=n {
            let prev = out.last().unwrap();
            out.push((prev - self.removal(k)) / qi(2));
        }
        out
    }

    pub fn interval_length(&self, n: u32) -> Q {
        self.lengths(n).pop().unwrap()
    }

    /// `lambda_1(A_n) = 1 - sum_{k<=n} 2^(k-1) r_k`, closed form.
    pub fn stage_measure_1d(&self, n: u32) -> Q {
        let mut removed = Q::zero();
        for k in 1..=n {
            removed += pow2(k as i64 - 1) * self.removal(k);
        }
        Q::one() - removed
    }

    /// `lambda_d(A_n^d)`.
    pub fn stage_measure(&self, n: u32) -> Q {
        pow_q(&self.stage_measure_1d(n), self.d as u32)
    }

    pub fn limit_measure_1d(&self) -> Q {
        Q::one() - self.removed_total()
    }

    /// `(1 - c rho / (1 - 2 rho))^d`.
    pub fn limit_measure(&self) -> Q {
        pow_q(&self.limit_measure_1d(), self.d as u32)
    }

    /// `lambda_d(A_n^d \ C^d) = lambda_1(A_n)^d - lambda_1(C)^d`.
    pub fn stage_defect(&self, n: u32) -> Q {
        self.stage_measure(n) - self.limit_measure()
    }

    fn check_stage(&self, n: u32) -> Result<()> {
        let bits = n as u64 * self.d as u64;
        if bits > self.max_stage_bits as u64 {
            return Err(Error::StageBudget {
                requested: n,
                dim: self.d,
                cap_bits: self.max_stage_bits,
                suggested: self.max_stage_bits / self.d as u32,
            });
        }
        Ok(())
    }

    fn count_cap(&self) -> usize {
        1usize << self.max_stage_bits.min(40)
    }

    /// The `2^n` closed intervals of the one-dimensional stage set, as
    /// `(left, right)` pairs in increasing order.
    pub fn stage_intervals(&self, n: u32) -> Result<Vec<(Q, Q)>> {
        if n > self.max_stage_bits {
            return Err(Error::StageBudget {
                requested: n,
                dim: 1,
                cap_bits: self.max_stage_bits,
                suggested: self.max_stage_bits,
            });
        }
        let ls = self.lengths(n);
        let mut lefts = vec![Q::zero()];
        for k in 1..=n as usize {
            let shift = &ls[k - 1] - &ls[k];
            lefts = lefts
                .into_iter()
                .flat_map(|a| {
                    let b = &a + &shift;
                    [a, b]
                })
                .collect();
        }
        let l = &ls[n as usize];
        Ok(lefts.into_iter().map(|a| { let b = &a + l; (a, b) }).collect())
    }

    /// Stage-`n` intervals meeting the half-open window `[lo, hi)`, clipped
    /// to it. Only the branches of the interval tree that meet the window are
    /// visited.
    pub fn intervals_in(&self, n: u32, lo: &Bound, hi: &Bound) -> Result<Vec<(Q, Q)>> {
        let ls = self.lengths(n);
        let cap = self.count_cap();
        let mut out = Vec::new();
        let mut stack = vec![(Q::zero(), 0usize)];
        while let Some((a, k)) = stack.pop() {
            let b = &a + &ls[k];
            let (ab, bb) = (Bound::Finite(a.clone()), Bound::Finite(b.clone()));
            if bb <= *lo || ab >= *hi {
                continue;
            }
            if k == n as usize {
                let l = if ab < *lo { lo.finite().unwrap().clone() } else { a };
                let r = if bb > *hi { hi.finite().unwrap().clone() } else { b };
                out.push((l, r));
                if out.len() > cap {
                    return Err(Error::StageBudget {
                        requested: n,
                        dim: 1,
                        cap_bits: self.max_stage_bits,
                        suggested: self.max_stage_bits,
                    });
                }
                continue;
            }
            let right = &b - &ls[k + 1];
            // push right first so the left child is processed first
            stack.push((right, k + 1));
            stack.push((a, k + 1));
        }
        Ok(out)
    }

    /// `lambda_1(A_n ∩ [lo, hi))` without materializing the stage set.
    pub fn measure_in(&self, n: u32, lo: &Bound, hi: &Bound) -> Q {
        let ls = self.lengths(n);
        let full_at = |k: usize| pow2(n as i64 - k as i64) * &ls[n as usize];
        let mut total = Q::zero();
        let mut stack = vec![(Q::zero(), 0usize)];
        while let Some((a, k)) = stack.pop() {
            let b = &a + &ls[k];
            let (ab, bb) = (Bound::Finite(a.clone()), Bound::Finite(b.clone()));
            if bb <= *lo || ab >= *hi {
                continue;
            }
            if ab >= *lo && bb <= *hi {
                total += full_at(k);
                continue;
            }
            if k == n as usize {
                let l = if ab < *lo { lo.finite().unwrap().clone() } else { a };
                let r = if bb > *hi { hi.finite().unwrap().clone() } else { b };
                total += r - l;
                continue;
            }
            let right = &b - &ls[k + 1];
            stack.push((right, k + 1));
            stack.push((a, k + 1));
        }
        total
    }

    /// `A_n^d` as a canonical union (closed intervals carried half-open).
    pub fn stage_approx(&self, n: u32) -> Result<BoxUnion> {
        self.check_stage(n)?;
        let iv = self.stage_intervals(n)?;
        Ok(BoxUnion::product(&vec![iv; self.d]))
    }

    /// `(A_n^d + translation) ∩ clip`.
    pub fn leaf_approx(&self, n: u32, translation: &[Q], clip: &Aabb) -> Result<BoxUnion> {
        check_dim(self.d, translation.len())?;
        check_dim(self.d, clip.dim())?;
        if clip.is_empty() {
            return Ok(BoxUnion::empty(self.d));
        }
        let mut factors = Vec::with_capacity(self.d);
        let mut total: usize = 1;
        for i in 0..self.d {
            let t = &translation[i];
            let lo = clip.lo[i].shift(&-t);
            let hi = clip.hi[i].shift(&-t);
            let iv = self.intervals_in(n, &lo, &hi)?;
            if iv.is_empty() {
                return Ok(BoxUnion::empty(self.d));
            }
            total = total.saturating_mul(iv.len());
            factors.push(iv.into_iter().map(|(a, b)| (a + t, b + t)).collect::<Vec<_>>());
        }
        if total > self.count_cap() {
            return Err(Error::StageBudget {
                requested: n,
                dim: self.d,
                cap_bits: self.max_stage_bits,
                suggested: self.max_stage_bits / self.d as u32,
            });
        }
        Ok(BoxUnion::product(&factors))
    }

    /// `lambda_d((A_n^d + translation) ∩ clip)`, computed factor by factor.
    pub fn leaf_measure(&self, n: u32, translation: &[Q], clip: &Aabb) -> Result<Q> {
        check_dim(self.d, translation.len())?;
        check_dim(self.d, clip.dim())?;
        if clip.is_empty() {
            return Ok(Q::zero());
        }
        let mut m = Q::one();
        for i in 0..self.d {
            let t = &translation[i];
            m *= self.measure_in(n, &clip.lo[i].shift(&-t), &clip.hi[i].shift(&-t));
            if m.is_zero() {
                break;
            }
        }
        Ok(m)
    }

    /// `y ∈ A_n` for the closed stage intervals.
    pub fn stage_contains(&self, n: u32, y: &Q) -> bool {
        if *y < Q::zero() || *y > Q::one() {
            return false;
        }
        let ls = self.lengths(n);
        let mut a = Q::zero();
        for k in 0..n as usize {
            let b = &a + &ls[k];
            let right = &b - &ls[k + 1];
            if *y >= right {
                a = right;
            } else if *y > &a + &ls[k + 1] {
                return false;
            }
        }
        true
    }

    /// Whether the point set `(A_n^d + t) ∩ clip`, with closed stage
    /// intervals, meets the open box `window` (all of space when `None`).
    ///
    /// The half-open carrier of a stage interval drops its right endpoint,
    /// which matters when that endpoint sits on the lower face of the clip;
    /// that point is tested separately.
    pub fn leaf_meets(
        &self,
        n: u32,
        t: &[Q],
        clip: &Aabb,
        window: Option<&OpenBox>,
    ) -> Result<bool> {
        check_dim(self.d, t.len())?;
        check_dim(self.d, clip.dim())?;
        if clip.is_empty() {
            return Ok(false);
        }
        for i in 0..self.d {
            if !self.axis_blocks(n, &t[i], &clip.lo[i], &clip.hi[i], window.map(|w| (w.lo(i), w.hi(i))))?.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// One-dimensional pieces of `(A_n + t) ∩ [c, e)` inside the open interval
    /// `(p, q)`, as closed intervals (a lone clip edge shows up as `(c, c)`).
    /// The flag tells whether there is any piece.
    pub(crate) fn axis_blocks(
        &self,
        n: u32,
        t: &Q,
        c: &Bound,
        e: &Bound,
        window: Option<(&Q, &Q)>,
    ) -> Result<(bool, Vec<(Q, Q)>)> {
        let (p, qq) = match window {
            Some((p, qq)) => (Bound::from(p), Bound::from(qq)),
            None => (Bound::NegInf, Bound::PosInf),
        };
        let lo = c.clone().max(p.clone());
        let hi = e.clone().min(qq.clone());
        let mut out: Vec<(Q, Q)> = self
            .intervals_in(n, &lo.shift(&-t), &hi.shift(&-t))?
            .into_iter()
            .map(|(a, b)| (a + t, b + t))
            .collect();
        if let Some(cv) = c.finite() {
            let edge_inside = *c > p && *c < hi;
            let covered = out.first().is_some_and(|(a, _)| a == cv);
            if edge_inside && !covered && self.stage_contains(n, &(cv - t)) {
                out.insert(0, (cv.clone(), cv.clone()));
            }
        }
        Ok((!out.is_empty(), out))
    }

    fn member_1d(&self, x: &Q, cap: u32) -> Membership {
        if *x < Q::zero() || *x > Q::one() {
            return Membership::Out { stage: 0 };
        }
        let ls = self.lengths(cap + 1);
        let mut a = Q::zero();
        for k in 0..=cap as usize {
            let b = &a + &ls[k];
            if *x == a || *x == b {
                return Membership::In { stage: k as u32 };
            }
            if k == cap as usize {
                break;
            }
            let g0 = &a + &ls[k + 1];
            let g1 = &b - &ls[k + 1];
            if *x > g0 && *x < g1 {
                return Membership::Out { stage: k as u32 + 1 };
            }
            if *x >= g1 {
                a = g1;
            }
        }
        Membership::Unknown { cap }
    }

    /// Budgeted decision of `x ∈ C^d`.
    pub fn membership(&self, x: &[Q], cap: u32) -> Result<Membership> {
        check_dim(self.d, x.len())?;
        let mut out_stage: Option<u32> = None;
        let mut in_stage = 0;
        let mut unknown = false;
        for xi in x {
            match self.member_1d(xi, cap) {
                Membership::Out { stage } => {
                    out_stage = Some(out_stage.map_or(stage, |s: u32| s.min(stage)));
                }
                Membership::In { stage } => in_stage = in_stage.max(stage),
                Membership::Unknown { .. } => unknown = true,
            }
        }
        Ok(match (out_stage, unknown) {
            (Some(stage), _) => Membership::Out { stage },
            (None, true) => Membership::Unknown { cap },
            (None, false) => Membership::In { stage: in_stage },
        })
    }

    /// Leftmost component of `(p, q) \ A_m` at the smallest stage `m <= cap`
    /// where one exists.
    pub(crate) fn first_gap_1d(&self, p: &Q, qq: &Q, cap: u32) -> Option<(u32, Q, Q)> {
        let zero = Q::zero();
        let one = Q::one();
        if *p < zero {
            return Some((0, p.clone(), qq.min(&zero).clone()));
        }
        if *qq > one {
            return Some((0, p.max(&one).clone(), qq.clone()));
        }
        let ls = self.lengths(cap);
        let mut a = zero;
        for k in 0..cap as usize {
            let b = &a + &ls[k];
            let g0 = &a + &ls[k + 1];
            let g1 = &b - &ls[k + 1];
            let lo = p.max(&g0);
            let hi = qq.min(&g1);
            if lo < hi {
                return Some((k as u32 + 1, lo.clone(), hi.clone()));
            }
            // (p, q) lies inside a single child
            if *p >= g1 {
                a = g1;
            }
        }
        None
    }

    /// Finds an open sub-box of `j` missing `C^d + t` at the smallest stage,
    /// taking the lowest coordinate and then the leftmost gap on ties.
    pub fn find_gap(&self, t: &[Q], j: &OpenBox, cap: u32) -> Result<GapSearch> {
        check_dim(self.d, t.len())?;
        check_dim(self.d, j.dim())?;
        let mut best: Option<(u32, usize, Q, Q)> = None;
        for i in 0..self.d {
            let p = j.lo(i) - &t[i];
            let qq = j.hi(i) - &t[i];
            if let Some((m, lo, hi)) = self.first_gap_1d(&p, &qq, cap) {
                if best.as_ref().is_none_or(|b| m < b.0) {
                    best = Some((m, i, lo + &t[i], hi + &t[i]));
                }
            }
        }
        let Some((stage, axis, lo, hi)) = best else {
            return Ok(GapSearch::NeedsDeeperStage { deepest: cap });
        };
        let witness = j.with_side(axis, lo, hi)?.shrink(&q(1, 8));
        Ok(GapSearch::Found(GapCertificate {
            stage,
            witness,
            translation: t.to_vec(),
            clip: None,
        }))
    }
}

impl GapCertificate {
    /// Re-checks disjointness from the stage set exactly.
    pub fn verify(&self, s: &CantorSchedule) -> Result<bool> {
        let clip = match &self.clip {
            Some(c) => c.clone(),
            None => Aabb::everything(s.d),
        };
        Ok(!s.leaf_meets(self.stage, &self.translation, &clip, Some(&self.witness))?)
    }
}
