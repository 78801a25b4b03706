mod common;

use common::{grid_box, positive_expr, r, ring_expr};
use proptest::prelude::*;
use transmeasure::cantor::CantorSchedule;
use transmeasure::geometry::Aabb;
use transmeasure::rational::Q;
use transmeasure::ring::{generate_rn, split_identity_check, RingExpr};

fn iv(a: Q, b: Q) -> Aabb {
    Aabb::from_q(vec![a], vec![b]).unwrap()
}

/// Expressions over the standard schedule with limit measures known exactly.
fn known() -> Vec<(RingExpr, Q)> {
    let c = RingExpr::cantor(1);
    let left = c.clip_to_box(&iv(r(0, 1), r(3, 8))).unwrap();
    let far = |k: i64| RingExpr::gen(vec![r(2 * k, 1)], iv(r(2 * k, 1), r(2 * k + 1, 1)));
    vec![
        (c.clone(), r(1, 2)),
        (left.clone(), r(1, 4)),
        (RingExpr::diff(c.clone(), left.clone()), r(1, 4)),
        (RingExpr::inter(c.clone(), left.clone()), r(1, 4)),
        (RingExpr::union(far(0), RingExpr::union(far(1), far(3))), r(3, 2)),
        (RingExpr::diff(RingExpr::union(far(0), far(1)), far(1)), r(1, 2)),
        // a stage-2 interval [0, 5/32] carries a quarter of C
        (c.clip_to_box(&iv(r(-1, 1), r(5, 32))).unwrap(), r(1, 8)),
    ]
}

#[test]
fn bounds_contain_closed_form_values() {
    let s = CantorSchedule::standard(1);
    for (e, value) in known() {
        for n in 0..=12 {
            let b = e.measure_bounds(&s, n).unwrap();
            assert!(b.contains(&value), "{e:?} at {n}: {b:?}");
        }
    }
}

#[test]
fn rn_levels_increase() {
    let s = CantorSchedule::standard(1);
    let pool = vec![
        RingExpr::cantor(1),
        RingExpr::clipped_translate(vec![r(1, 4)]),
        RingExpr::gen(vec![r(0, 1)], iv(r(1, 4), r(3, 4))),
    ];
    let rep = generate_rn(&s, &pool, 3, 4, 100_000).unwrap();
    for w in rep.levels.windows(2) {
        assert!(w[1].starts_with(&w[0]));
    }
    for e in rep.last() {
        e.validate(1).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bounds_are_certified_and_shrink(e in ring_expr(1, 8)) {
        let s = CantorSchedule::standard(1);
        let l = Q::from_integer(e.leaf_count().into());
        let all: Vec<_> = (0..=8).map(|n| e.measure_bounds(&s, n).unwrap()).collect();
        for (n, b) in all.iter().enumerate() {
            prop_assert!(b.lower >= Q::from_integer(0.into()));
            prop_assert!(b.lower <= b.upper);
            prop_assert!(b.width() <= &l * r(2, 1) * s.stage_defect(n as u32));
        }
        for a in &all {
            for b in &all {
                prop_assert!(a.intersects(b));
            }
        }
    }

    #[test]
    fn positive_expressions_shrink_from_outside(e in positive_expr(1, 6)) {
        let s = CantorSchedule::standard(1);
        let mut prev = e.approx_set(&s, 0).unwrap();
        let mut prev_upper = e.measure_bounds(&s, 0).unwrap().upper;
        for n in 1..=8 {
            let cur = e.approx_set(&s, n).unwrap();
            prop_assert!(cur.is_subset_of(&prev).unwrap());
            let upper = e.measure_bounds(&s, n).unwrap().upper;
            prop_assert!(upper <= prev_upper);
            prev = cur;
            prev_upper = upper;
        }
    }

    #[test]
    fn consecutive_stages_differ_by_at_most_the_shells(e in ring_expr(1, 8), n in 0u32..7) {
        let s = CantorSchedule::standard(1);
        let a = e.approx_set(&s, n).unwrap();
        let b = e.approx_set(&s, n + 1).unwrap();
        let sym = a.subtract(&b).unwrap().union(&b.subtract(&a).unwrap()).unwrap();
        let l = Q::from_integer(e.leaf_count().into());
        prop_assert!(sym.measure().unwrap() <= l * s.stage_defect(n));
    }

    #[test]
    fn clipping_commutes_with_stages(e in ring_expr(1, 8), clip in grid_box(1, -2, 18, 16), n in 0u32..=6) {
        let s = CantorSchedule::standard(1);
        let clipped = e.clip_to_box(&clip).unwrap();
        prop_assert_eq!(clipped.leaf_count(), e.leaf_count());
        prop_assert_eq!(
            clipped.approx_set(&s, n).unwrap(),
            e.approx_set(&s, n).unwrap().intersect_box(&clip).unwrap()
        );
    }

    #[test]
    fn clipping_commutes_in_two_dimensions(e in ring_expr(2, 4), clip in grid_box(2, -2, 18, 16), n in 0u32..=3) {
        let s = CantorSchedule::standard(2);
        prop_assert_eq!(
            e.clip_to_box(&clip).unwrap().approx_set(&s, n).unwrap(),
            e.approx_set(&s, n).unwrap().intersect_box(&clip).unwrap()
        );
    }

    #[test]
    fn splitting_is_exact(e in ring_expr(1, 8), t in -8i64..24, upper in any::<bool>(), n in 0u32..=8) {
        let s = CantorSchedule::standard(1);
        let a = if upper { Aabb::below(1, 0, r(t, 16)) } else { Aabb::at_or_above(1, 0, r(t, 16)) };
        let rep = split_identity_check(&s, &e, &a, n).unwrap();
        prop_assert!(rep.holds);
        prop_assert_eq!(rep.whole, rep.inside + rep.outside);
    }

    #[test]
    fn json_round_trip(e in ring_expr(2, 6)) {
        let text = serde_json::to_string(&e).unwrap();
        let back: RingExpr = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, e);
    }
}
