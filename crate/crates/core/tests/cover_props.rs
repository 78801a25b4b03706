mod common;

use common::{r, ring_expr};
use proptest::prelude::*;
use transmeasure::cantor::CantorSchedule;
use transmeasure::cover::{
    find_uncovered_box, grid_pool, outer_upper, positive_hull, verify_cover, CoverTarget,
    OuterUpper, SearchConfig,
};
use transmeasure::geometry::{Aabb, BoxUnion};
use transmeasure::rational::Q;
use transmeasure::ring::{generate_rn, RingExpr};

fn iv(a: Q, b: Q) -> Aabb {
    Aabb::from_q(vec![a], vec![b]).unwrap()
}

fn pieces() -> Vec<RingExpr> {
    let c = RingExpr::cantor(1);
    vec![
        c.clip_to_box(&iv(r(0, 1), r(3, 8))).unwrap(),
        c.clip_to_box(&iv(r(5, 8), r(1, 1))).unwrap(),
        c.clone(),
        RingExpr::clipped_translate(vec![r(1, 4)]),
    ]
}

#[test]
fn adding_pool_elements_never_raises_the_bound() {
    let s = CantorSchedule::standard(1);
    let cfg = SearchConfig { stage: 5, ..Default::default() };
    let target = CoverTarget::Expr(RingExpr::cantor(1));
    let all = pieces();
    let mut prev: Option<Q> = None;
    for k in 1..=all.len() {
        let res = outer_upper(&s, &target, &all[..k], &cfg).unwrap();
        if let OuterUpper::Finite { exhaustive, .. } = &res {
            assert!(exhaustive);
        }
        if let (Some(p), Some(t)) = (&prev, res.total()) {
            assert!(t <= p);
        }
        if let Some(t) = res.total() {
            prev = Some(t.clone());
        }
    }
    assert!(prev.is_some());
}

#[test]
fn subadditive_on_disjoint_targets() {
    let s = CantorSchedule::standard(1);
    let cfg = SearchConfig { stage: 5, ..Default::default() };
    let p = pieces();
    let (t1, t2) = (p[0].clone(), p[1].clone());
    let pool = vec![RingExpr::cantor(1)];
    let a = outer_upper(&s, &CoverTarget::Expr(t1.clone()), &pool, &cfg).unwrap();
    let b = outer_upper(&s, &CoverTarget::Expr(t2.clone()), &pool, &cfg).unwrap();
    let ab = outer_upper(&s, &CoverTarget::Expr(RingExpr::union(t1, t2)), &pool, &cfg).unwrap();
    let (a, b, ab) = (a.total().unwrap(), b.total().unwrap(), ab.total().unwrap());
    assert!(*ab <= a + b);
}

#[test]
fn covers_of_c_cost_at_least_its_measure() {
    let s = CantorSchedule::standard(1);
    let c = RingExpr::cantor(1);
    for stage in 1..=8 {
        let cfg = SearchConfig { stage, ..Default::default() };
        let res = outer_upper(&s, &CoverTarget::Expr(c.clone()), &pieces(), &cfg).unwrap();
        let OuterUpper::Finite { attempt, .. } = res else { panic!("C covers itself") };
        assert!(attempt.verified);
        let lower = c.measure_bounds(&s, stage).unwrap().lower;
        assert!(attempt.total_premeasure_upper >= lower);
        assert!(attempt.total_premeasure_upper >= s.limit_measure());
    }
}

#[test]
fn rn_elements_have_witnesses() {
    for d in 1..=2usize {
        let s = CantorSchedule::standard(d);
        let pool = grid_pool(d, 3);
        let rep = generate_rn(&s, &pool, 3, 4, 1_000_000).unwrap();
        for e in rep.last() {
            let w = find_uncovered_box(&s, &Aabb::unit(d), std::slice::from_ref(e), 12).unwrap();
            let w = w.witness().expect("nowhere dense element");
            assert!(w.verify(&s, &Aabb::unit(d), std::slice::from_ref(e)).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn hull_contains_expression(e in ring_expr(1, 8), n in 0u32..=3) {
        let s = CantorSchedule::standard(1);
        let h = positive_hull(&e);
        prop_assert!(h.is_monotone());
        prop_assert!(e.approx_set(&s, n).unwrap().is_subset_of(&h.approx_set(&s, n).unwrap()).unwrap());
    }

    #[test]
    fn witnesses_are_sound(
        els in proptest::collection::vec(ring_expr(1, 4), 0..5),
        lo in 0i64..12, w in 2i64..8,
    ) {
        let s = CantorSchedule::standard(1);
        let target = iv(r(lo, 16), r(lo + w, 16));
        let res = find_uncovered_box(&s, &target, &els, 12).unwrap();
        if let Some(wit) = res.witness() {
            prop_assert!(wit.verify(&s, &target, &els).unwrap());
            prop_assert!(target.contains_box(wit.witness.carrier()));
            for e in &els {
                let hull = positive_hull(e).approx_set(&s, wit.stage).unwrap();
                prop_assert!(hull.intersect_box(wit.witness.carrier()).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn witnesses_are_sound_in_two_dimensions(els in proptest::collection::vec(ring_expr(2, 3), 0..4)) {
        let s = CantorSchedule::standard(2);
        let res = find_uncovered_box(&s, &Aabb::unit(2), &els, 8).unwrap();
        let wit = res.witness().expect("coarse pools always leave a gap");
        prop_assert!(wit.verify(&s, &Aabb::unit(2), &els).unwrap());
    }

    #[test]
    fn cover_soundness(els in proptest::collection::vec(ring_expr(1, 4), 1..4), n in 0u32..5) {
        let s = CantorSchedule::standard(1);
        let target = els[0].approx_set(&s, n).unwrap();
        let rep = verify_cover(&s, &target, &els, n).unwrap();
        prop_assert!(rep.covers_outer_hulls);
        prop_assert_eq!(rep.uncovered_measure, Q::from_integer(0.into()));
        let bigger = target.union(&BoxUnion::from_box(&iv(r(3, 1), r(4, 1)))).unwrap();
        let rep = verify_cover(&s, &bigger, &els, n).unwrap();
        prop_assert!(!rep.covers_outer_hulls || rep.uncovered_measure == Q::from_integer(0.into()));
    }
}
