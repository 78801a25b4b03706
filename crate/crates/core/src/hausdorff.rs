//! Power-gauge covers, the volume/diameter comparison, the covering argument
//! that pins a Hausdorff measure agreeing with Lebesgue measure on the Cantor
//! set, and the intermediate-value demonstration for the range.
//!
//! All covers here are constructed, not optimized, so every gauge sum is an
//! upper bound for `nu_delta^*` and nothing more.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cantor::CantorSchedule;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Aabb, BoxUnion, ExtendedRational};
use crate::packing::{pack_cover, PackingLayout};
use crate::rational::{dyadic_root_floor, exact_root, pow2, pow_q, q, qi, serde_q, serde_qvec, Q};
use crate::ring::{MeasureBounds, RingExpr};

/// Bits used when `alpha` has to be approximated from below.
const ALPHA_BITS: u32 = 40;

/// Gauge `h(t) = t^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gauge {
    pub s: u32,
}

impl Gauge {
    pub fn new(s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::precondition("gauge exponent must be positive"));
        }
        Ok(Gauge { s })
    }

    pub fn eval(&self, t: &ExtendedRational) -> ExtendedRational {
        t.pow(self.s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cube {
    #[serde(with = "serde_qvec")]
    pub corner: Vec<Q>,
    #[serde(with = "serde_q")]
    pub side: Q,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaCover {
    #[serde(with = "serde_q")]
    pub delta: Q,
    /// Cantor stage the cubes come from; absent for box-union covers.
    pub stage: Option<u32>,
    pub cubes: Vec<Cube>,
    /// Common diameter of the cubes.
    pub diameter: ExtendedRational,
    pub gauge_sum: ExtendedRational,
}

pub enum CoverSet<'a> {
    Cantor(&'a CantorSchedule),
    Boxes(&'a BoxUnion),
}

fn diam_of_side(side: &Q, d: usize) -> ExtendedRational {
    ExtendedRational::surd(side.clone(), d as u32)
}

/// `side * sqrt(d) < delta`, decided by squaring.
fn diam_below(side: &Q, d: usize, delta: &Q) -> bool {
    side * side * qi(d as i64) < delta * delta
}

/// A `delta`-cover with its gauge sum, an upper bound for `nu_delta^*(set)`.
///
/// Cantor sets are covered by the surviving cubes of the first stage
/// `n >= min_stage` whose diameter is below `delta`; box unions by the dyadic
/// grid cubes of the first side `2^-k` (`k >= 0`) small enough.
pub fn nu_delta_upper(
    set: CoverSet<'_>,
    g: Gauge,
    delta: &Q,
    min_stage: u32,
    stage_cap: u32,
) -> Result<DeltaCover> {
    if *delta <= Q::zero() {
        return Err(Error::precondition("delta must be positive"));
    }
    match set {
        CoverSet::Cantor(s) => {
            let d = s.d;
            let ls = s.lengths(stage_cap);
            let n = (min_stage..=stage_cap)
                .find(|&n| diam_below(&ls[n as usize], d, delta))
                .ok_or_else(|| {
                    Error::Budget(format!("no stage up to {stage_cap} has cube diameter below delta"))
                })?;
            let side = ls[n as usize].clone();
            let iv = s.stage_approx(n)?;
            let cubes: Vec<Cube> = iv
                .boxes()
                .into_iter()
                .map(|b| Cube { corner: b.lo.iter().map(|x| x.finite().unwrap().clone()).collect(), side: side.clone() })
                .collect();
            let diameter = diam_of_side(&side, d);
            let gauge_sum = &g.eval(&diameter) * &Q::from_integer(BigInt::from(cubes.len()));
            Ok(DeltaCover { delta: delta.clone(), stage: Some(n), cubes, diameter, gauge_sum })
        }
        CoverSet::Boxes(u) => {
            let d = u.dim();
            let mut k = 0i64;
            while !diam_below(&pow2(-k), d, delta) {
                k += 1;
            }
            let side = pow2(-k);
            let cap = 1usize << stage_cap.min(40);
            let mut cells: BTreeSet<Vec<BigInt>> = BTreeSet::new();
            for b in u.boxes() {
                let mut ranges = Vec::with_capacity(d);
                for i in 0..d {
                    let lo = b.lo[i].finite().ok_or_else(|| Error::Unbounded("cover of box union".into()))?;
                    let hi = b.hi[i].finite().ok_or_else(|| Error::Unbounded("cover of box union".into()))?;
                    let first = (lo / &side).floor().to_integer();
                    let last = (hi / &side).ceil().to_integer();
                    ranges.push((first, last));
                }
                let count = ranges
                    .iter()
                    .map(|(a, b)| (b - a).to_usize().unwrap_or(usize::MAX))
                    .fold(1usize, |acc, c| acc.saturating_mul(c));
                if cells.len().saturating_add(count) > cap {
                    return Err(Error::Budget(format!("dyadic cover needs more than {cap} cubes")));
                }
                let mut idx: Vec<BigInt> = ranges.iter().map(|(a, _)| a.clone()).collect();
                'cells: loop {
                    cells.insert(idx.clone());
                    for i in (0..d).rev() {
                        idx[i] += 1;
                        if idx[i] < ranges[i].1 {
                            continue 'cells;
                        }
                        idx[i] = ranges[i].0.clone();
                    }
                    break;
                }
            }
            let cubes: Vec<Cube> = cells
                .into_iter()
                .map(|c| Cube {
                    corner: c.into_iter().map(|i| Q::from_integer(i) * &side).collect(),
                    side: side.clone(),
                })
                .collect();
            let diameter = diam_of_side(&side, d);
            let gauge_sum = &g.eval(&diameter) * &Q::from_integer(BigInt::from(cubes.len()));
            Ok(DeltaCover { delta: delta.clone(), stage: None, cubes, diameter, gauge_sum })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiamVolumeReport {
    #[serde(with = "serde_q")]
    pub measure: Q,
    #[serde(with = "serde_q")]
    pub diam_squared: Q,
    /// `diam^d` when it lies in `Q[sqrt d]`.
    pub diam_pow_d: Option<ExtendedRational>,
    pub holds: bool,
}

/// `lambda(u) <= diam(u)^d`: `u` fits in an axis cube of side `diam(u)`.
pub fn diam_volume_check(u: &BoxUnion) -> Result<DiamVolumeReport> {
    let d = u.dim();
    let boxes = u.boxes();
    let mut diam_squared = Q::zero();
    for a in &boxes {
        for b in &boxes {
            let mut s = Q::zero();
            for i in 0..d {
                let (alo, ahi) = (bounded(&a.lo[i])?, bounded(&a.hi[i])?);
                let (blo, bhi) = (bounded(&b.lo[i])?, bounded(&b.hi[i])?);
                let w = (bhi - alo).abs().max((ahi - blo).abs());
                s += &w * &w;
            }
            if s > diam_squared {
                diam_squared = s;
            }
        }
    }
    let measure = u.measure()?;
    let holds = &measure * &measure <= pow_q(&diam_squared, d as u32);
    let half = pow_q(&diam_squared, (d / 2) as u32);
    let diam_pow_d = if d.is_multiple_of(2) {
        Some(ExtendedRational::rational(half, d as u32))
    } else if let Some(r) = exact_root(&diam_squared, 2) {
        Some(ExtendedRational::rational(half * r, d as u32))
    } else {
        exact_root(&(&diam_squared / qi(d as i64)), 2)
            .map(|r| ExtendedRational::surd(half * r, d as u32))
    };
    Ok(DiamVolumeReport { measure, diam_squared, diam_pow_d, holds })
}

fn bounded(b: &crate::geometry::Bound) -> Result<&Q> {
    b.finite().ok_or_else(|| Error::Unbounded("diameter of unbounded union".into()))
}

/// An exact comparison with both sides recorded.
#[derive(Clone, Debug, Serialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: ExtendedRational,
    pub relation: &'static str,
    pub rhs: ExtendedRational,
    pub holds: bool,
}

impl Inequality {
    fn new(name: &str, lhs: ExtendedRational, relation: &'static str, rhs: ExtendedRational) -> Self {
        let holds = match relation {
            "<" => lhs < rhs,
            "<=" => lhs <= rhs,
            "=" => lhs == rhs,
            _ => unreachable!("unknown relation {relation}"),
        };
        Inequality { name: name.to_string(), lhs, relation, rhs, holds }
    }

    /// Recomputes `holds` from the recorded sides.
    pub fn recheck(&self) -> bool {
        Inequality::new(&self.name, self.lhs.clone(), self.relation, self.rhs.clone()).holds
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryReport {
    pub d: usize,
    pub gauge: Gauge,
    #[serde(with = "serde_q")]
    pub delta: Q,
    #[serde(with = "serde_q")]
    pub a: Q,
    /// Constant in `lambda(E) <= C_d diam(E)^d`; the enclosing axis cube gives 1.
    pub volume_constant: u32,
    pub stage: u32,
    pub cover_size: usize,
    /// Number of cover sets kept after truncation.
    pub truncated: usize,
    #[serde(with = "serde_q")]
    pub cube_side: Q,
    #[serde(with = "serde_q")]
    pub alpha: Q,
    pub alpha_exact: bool,
    pub inequalities: Vec<Inequality>,
    /// Whether this cover fits the `a + 1` gauge budget that a Hausdorff
    /// measure equal to `a` on `K` would allow. It depends on the gauge's
    /// normalization, so it is reported but not part of the chain.
    pub gauge_budget: Inequality,
    pub packing: PackingLayout,
    pub all_hold: bool,
}

/// `alpha` with `alpha^d = d^(-d/2) a / 2`, or the largest dyadic below it.
pub fn alpha_for(a: &Q, d: usize) -> (Q, bool) {
    // alpha^(2d) = (a/2)^2 / d^d
    let target = pow_q(&(a / qi(2)), 2) / pow_q(&qi(d as i64), d as u32);
    match exact_root(&target, 2 * d as u32) {
        Some(r) => (r, true),
        None => (dyadic_root_floor(&target, 2 * d as u32, ALPHA_BITS), false),
    }
}

/// Runs the covering argument on `K = C^d` with exact numbers: a
/// `delta`-cover of `K`, truncation to a finite subfamily carrying more than
/// `a/2` of `sum diam^d`, equal-diameter cubes, packing into `[0, alpha/2]^d`,
/// and the resulting gauge bound.
pub fn corollary_pipeline(
    s: &CantorSchedule,
    g: Gauge,
    delta: &Q,
    a: &Q,
    stage_cap: u32,
) -> Result<CorollaryReport> {
    let d = s.d;
    let r = d as u32;
    if *a <= Q::zero() {
        return Err(Error::precondition("a must be positive (alpha would vanish)"));
    }
    if *a > s.limit_measure() {
        return Err(Error::precondition("a must not exceed the measure of the Cantor set"));
    }
    let cover = nu_delta_upper(CoverSet::Cantor(s), g, delta, 0, stage_cap)?;
    let stage = cover.stage.unwrap_or(0);
    let side = cover.cubes.first().map(|c| c.side.clone()).unwrap_or_else(Q::zero);
    let count = cover.cubes.len();
    let ext = |x: Q| ExtendedRational::rational(x, r);
    let diam_d = cover.diameter.pow(r);
    let cube_volume = pow_q(&side, r);

    let mut ineq = Vec::new();
    ineq.push(Inequality::new("diam E_j < delta", cover.diameter.clone(), "<", ext(delta.clone())));
    ineq.push(Inequality::new("lambda(E_j) <= diam(E_j)^d", ext(cube_volume.clone()), "<=", diam_d.clone()));
    let stage_volume = &cube_volume * Q::from_integer(count.into());
    ineq.push(Inequality::new("a <= sum lambda(E_j)", ext(a.clone()), "<=", ext(stage_volume)));
    let all_diam = &diam_d * &Q::from_integer(count.into());
    ineq.push(Inequality::new("a <= sum diam(E_j)^d", ext(a.clone()), "<=", all_diam));

    // smallest k with k * diam^d > a/2
    let half_a = ext(a / qi(2));
    let exceeds = |k: usize| &diam_d * &Q::from_integer(k.into()) > half_a;
    let (mut lo, mut hi) = (0usize, count);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if exceeds(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let k = lo;
    let partial = &diam_d * &Q::from_integer(k.into());
    ineq.push(Inequality::new("a/2 < sum_{j<=n} diam(E_j)^d", half_a, "<", partial));

    // Q_j = [0, diam E_j / sqrt d]^d has side equal to the stage side
    let q_diam = diam_of_side(&side, d);
    ineq.push(Inequality::new("diam Q_j = diam E_j", q_diam.clone(), "=", cover.diameter.clone()));

    let (alpha, alpha_exact) = alpha_for(a, d);
    let alpha_d = pow_q(&alpha, r);
    // alpha^d <= d^(-d/2) a/2, as alpha^d * d^(d/2) <= a/2
    let sqrt_d_pow = ExtendedRational::surd(Q::one(), r).pow(r);
    ineq.push(Inequality::new(
        "alpha^d d^(d/2) <= a/2",
        &sqrt_d_pow * &alpha_d,
        if alpha_exact { "=" } else { "<=" },
        ext(a / qi(2)),
    ));
    let q_volume = &cube_volume * Q::from_integer(k.into());
    ineq.push(Inequality::new("alpha^d <= sum lambda(Q_j)", ext(alpha_d), "<=", ext(q_volume)));

    let sides = vec![side.clone(); k];
    let packing = pack_cover(&sides, d, &q(1, 2), &alpha)?;
    let covered = Aabb::cube(&vec![Q::zero(); d], &(&alpha / qi(2)));
    let packed = if packing.target == covered { qi(1) } else { qi(0) };
    ineq.push(Inequality::new("translates of Q_j cover [0, alpha/2]^d", ext(packed), "=", ext(qi(1))));

    let q_gauge = &g.eval(&q_diam) * &Q::from_integer(k.into());
    ineq.push(Inequality::new(
        "sum_{j<=n} h(diam Q_j) <= sum h(diam E_j)",
        q_gauge,
        "<=",
        cover.gauge_sum.clone(),
    ));
    let gauge_budget =
        Inequality::new("sum h(diam E_j) <= a + 1", cover.gauge_sum.clone(), "<=", ext(a + qi(1)));

    let all_hold = ineq.iter().all(|i| i.holds) && packing.verified;
    Ok(CorollaryReport {
        d,
        gauge: g,
        delta: delta.clone(),
        a: a.clone(),
        volume_constant: 1,
        stage,
        cover_size: count,
        truncated: k,
        cube_side: side,
        alpha,
        alpha_exact,
        inequalities: ineq,
        gauge_budget,
        packing,
        all_hold,
    })
}

/// `C^d ∩ {x_1 < x}` (the hyperplane itself is null).
pub fn left_part(d: usize, x: &Q) -> Result<RingExpr> {
    RingExpr::cantor(d).clip_to_box(&Aabb::below(d, 0, x.clone()))
}

/// Certified bounds for `lambda(C^d ∩ {x_1 <= x})` of width at most `tol`.
pub fn range_function(s: &CantorSchedule, x: &Q, tol: &Q) -> Result<MeasureBounds> {
    left_part(s.d, x)?.premeasure(s, tol)
}

/// The same quantity at a fixed stage; both ends are nondecreasing in `x`.
pub fn range_bounds_at(s: &CantorSchedule, x: &Q, n: u32) -> Result<MeasureBounds> {
    left_part(s.d, x)?.measure_bounds(s, n)
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSolution {
    #[serde(with = "serde_q")]
    pub x: Q,
    #[serde(with = "serde_q")]
    pub target: Q,
    #[serde(with = "serde_q")]
    pub tol: Q,
    pub bounds: MeasureBounds,
    pub iterations: u32,
}

const MAX_BISECTIONS: u32 = 200;

/// Bisection for `x` with `|midpoint(range_function(x)) - target| <= tol`.
pub fn solve_level(s: &CantorSchedule, target: &Q, tol: &Q) -> Result<LevelSolution> {
    if *tol <= Q::zero() {
        return Err(Error::precondition("tolerance must be positive"));
    }
    if *target <= Q::zero() || *target >= s.limit_measure() {
        return Err(Error::precondition("target must lie strictly between 0 and the measure of C^d"));
    }
    check_dim(s.d, s.d)?;
    let inner_tol = tol / qi(2);
    let (mut lo, mut hi) = (Q::zero(), Q::one());
    for it in 1..=MAX_BISECTIONS {
        let mid = (&lo + &hi) / qi(2);
        let bounds = range_function(s, &mid, &inner_tol)?;
        let m = bounds.midpoint();
        if (&m - target).abs() <= *tol {
            return Ok(LevelSolution { x: mid, target: target.clone(), tol: tol.clone(), bounds, iterations: it });
        }
        if m < *target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Budget(format!("no level found in {MAX_BISECTIONS} bisections")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_gauge_sums() {
        let s = CantorSchedule::standard(1);
        let c = nu_delta_upper(CoverSet::Cantor(&s), Gauge { s: 1 }, &qi(1), 4, 12).unwrap();
        assert_eq!(c.stage, Some(4));
        assert_eq!(c.gauge_sum, ExtendedRational::rational(q(17, 32), 1));
        assert_eq!(c.cubes.len(), 16);
        assert_eq!(c.cubes[0].side, q(17, 512));
        let c = nu_delta_upper(CoverSet::Cantor(&s), Gauge { s: 2 }, &qi(1), 4, 12).unwrap();
        assert_eq!(c.gauge_sum, ExtendedRational::rational(q(289, 16384), 1));
    }

    #[test]
    fn delta_picks_stage() {
        let s = CantorSchedule::standard(1);
        // l_1 = 3/8, l_2 = 5/32
        let c = nu_delta_upper(CoverSet::Cantor(&s), Gauge { s: 1 }, &q(1, 4), 0, 12).unwrap();
        assert_eq!(c.stage, Some(2));
        assert!(nu_delta_upper(CoverSet::Cantor(&s), Gauge { s: 1 }, &q(1, 1 << 20), 0, 12).is_err());
    }

    #[test]
    fn empty_union_cover() {
        let u = BoxUnion::empty(2);
        let c = nu_delta_upper(CoverSet::Boxes(&u), Gauge { s: 2 }, &q(1, 2), 0, 20).unwrap();
        assert!(c.cubes.is_empty());
        assert!(c.gauge_sum.is_zero());
    }

    #[test]
    fn union_cover_contains_union() {
        let u = BoxUnion::from_boxes(
            2,
            &[Aabb::from_q(vec![q(1, 3), qi(0)], vec![q(2, 3), q(1, 5)]).unwrap()],
        )
        .unwrap();
        let c = nu_delta_upper(CoverSet::Boxes(&u), Gauge { s: 2 }, &q(1, 2), 0, 20).unwrap();
        let cubes: Vec<Aabb> = c.cubes.iter().map(|k| Aabb::cube(&k.corner, &k.side)).collect();
        assert!(u.is_subset_of(&BoxUnion::from_boxes(2, &cubes).unwrap()).unwrap());
        assert!(c.diameter < ExtendedRational::rational(q(1, 2), 2));
    }

    #[test]
    fn diam_volume_examples() {
        let r = diam_volume_check(&BoxUnion::from_box(&Aabb::unit(2))).unwrap();
        assert_eq!((r.measure.clone(), r.diam_squared.clone()), (qi(1), qi(2)));
        assert_eq!(r.diam_pow_d, Some(ExtendedRational::rational(qi(2), 2)));
        assert!(r.holds);
        let iv = Aabb::from_q(vec![q(1, 4)], vec![q(7, 8)]).unwrap();
        let r = diam_volume_check(&BoxUnion::from_box(&iv)).unwrap();
        assert_eq!(r.diam_pow_d, Some(ExtendedRational::rational(r.measure.clone(), 1)));
        assert!(r.holds);
    }

    #[test]
    fn pipeline_one_dimension() {
        let s = CantorSchedule::standard(1);
        let r = corollary_pipeline(&s, Gauge { s: 1 }, &q(1, 4), &q(1, 2), 12).unwrap();
        assert_eq!(r.alpha, q(1, 4));
        assert!(r.alpha_exact);
        assert_eq!(r.packing.target, Aabb::cube(&[qi(0)], &q(1, 8)));
        assert!(r.all_hold, "{:#?}", r.inequalities);
        assert!(r.gauge_budget.holds);
        assert!(r.inequalities.iter().all(Inequality::recheck));
    }

    #[test]
    fn pipeline_two_dimensions() {
        let s = CantorSchedule::standard(2);
        let r = corollary_pipeline(&s, Gauge { s: 2 }, &q(1, 2), &q(1, 4), 12).unwrap();
        assert!(r.all_hold, "{:#?}", r.inequalities);
        let r = corollary_pipeline(&s, Gauge { s: 2 }, &q(1, 2), &q(1, 5), 12).unwrap();
        assert!(r.all_hold);
    }

    #[test]
    fn pipeline_irrational_alpha() {
        let s = CantorSchedule::standard(3);
        let r = corollary_pipeline(&s, Gauge { s: 3 }, &q(1, 2), &q(1, 8), 8).unwrap();
        assert!(!r.alpha_exact);
        assert!(r.all_hold, "{:#?}", r.inequalities);
        // 3 sqrt 3 lambda(A_n^3) overshoots 9/8 for the unnormalized gauge
        assert!(!r.gauge_budget.holds);
    }

    #[test]
    fn pipeline_rejects_degenerate_a() {
        let s = CantorSchedule::standard(1);
        assert!(corollary_pipeline(&s, Gauge { s: 1 }, &q(1, 4), &qi(0), 12).is_err());
        assert!(corollary_pipeline(&s, Gauge { s: 1 }, &q(1, 4), &q(3, 4), 12).is_err());
    }

    #[test]
    fn range_examples() {
        let s = CantorSchedule::standard(1);
        let tol = q(1, 1024);
        let b = range_function(&s, &qi(0), &tol).unwrap();
        assert_eq!((b.lower, b.upper), (qi(0), qi(0)));
        assert!(range_function(&s, &qi(1), &tol).unwrap().contains(&q(1, 2)));
        assert!(range_function(&s, &q(1, 2), &tol).unwrap().contains(&q(1, 4)));
    }

    #[test]
    fn level_at_symmetry_point() {
        let s = CantorSchedule::standard(1);
        let tol = q(1, 1 << 12);
        let r = solve_level(&s, &q(1, 4), &tol).unwrap();
        assert_eq!(r.x, q(1, 2));
        let r = solve_level(&s, &q(1, 8), &tol).unwrap();
        assert!(r.x > qi(0) && r.x < q(1, 2));
        assert!(solve_level(&s, &q(1, 2), &tol).is_err());
    }
}
