#![allow(dead_code)]

use num_bigint::BigInt;
use proptest::prelude::*;
use transmeasure::geometry::Aabb;
use transmeasure::rational::Q;
use transmeasure::ring::RingExpr;

pub fn r(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Interval with endpoints on the `1/den` grid inside `[lo, hi]` (in grid units).
pub fn grid_interval(lo: i64, hi: i64, den: i64) -> impl Strategy<Value = (Q, Q)> {
    (lo..hi, 1i64..=(hi - lo)).prop_map(move |(a, w)| {
        let b = (a + w).min(hi);
        (r(a, den), r(b.max(a + 1), den))
    })
}

pub fn grid_box(d: usize, lo: i64, hi: i64, den: i64) -> impl Strategy<Value = Aabb> {
    proptest::collection::vec(grid_interval(lo, hi, den), d).prop_map(|ivs| {
        let (lo, hi): (Vec<Q>, Vec<Q>) = ivs.into_iter().unzip();
        Aabb::from_q(lo, hi).unwrap()
    })
}

pub fn leaf(d: usize) -> impl Strategy<Value = RingExpr> {
    (proptest::collection::vec(-4i64..12, d), grid_box(d, -2, 18, 16))
        .prop_map(|(t, clip)| RingExpr::gen(t.into_iter().map(|k| r(k, 8)).collect(), clip))
}

/// Random ring expressions with at most `max_leaves` generators.
pub fn ring_expr(d: usize, max_leaves: usize) -> impl Strategy<Value = RingExpr> {
    leaf(d)
        .prop_recursive(3, max_leaves as u32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| RingExpr::union(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| RingExpr::diff(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| RingExpr::inter(a, b)),
            ]
        })
        .prop_filter("leaf budget", move |e| e.leaf_count() <= max_leaves)
}

/// Expressions built from generators and unions only.
pub fn positive_expr(d: usize, max_leaves: usize) -> impl Strategy<Value = RingExpr> {
    proptest::collection::vec(leaf(d), 1..=max_leaves).prop_map(|ls| {
        ls.into_iter().reduce(RingExpr::union).unwrap()
    })
}
