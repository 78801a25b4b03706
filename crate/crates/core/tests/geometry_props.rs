mod common;

use common::{grid_box, r};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use std::cmp::Ordering;
use transmeasure::geometry::{tile_check, Aabb, BoxUnion, ExtendedRational};
use transmeasure::rational::Q;

fn boxes(d: usize, max: usize) -> impl Strategy<Value = Vec<Aabb>> {
    proptest::collection::vec(grid_box(d, 0, 8, 4), 0..=max)
}

fn union_of(d: usize, bs: &[Aabb]) -> BoxUnion {
    BoxUnion::from_boxes(d, bs).unwrap()
}

/// Midpoints of the 1/8 grid cells covering [0, 2)^d.
fn probe_points(d: usize) -> Vec<Vec<Q>> {
    let mut pts = vec![vec![]];
    for _ in 0..d {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (0..16).map(move |k| {
                    let mut p = p.clone();
                    p.push(r(2 * k + 1, 16));
                    p
                })
            })
            .collect();
    }
    pts
}

fn in_any(bs: &[Aabb], x: &[Q]) -> bool {
    bs.iter().any(|b| b.contains_point(x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_unique(d in 1usize..=3, bs in boxes(3, 5)) {
        let bs: Vec<Aabb> = bs.into_iter().map(|b| Aabb::from_q(
            b.lo[..d].iter().map(|x| x.finite().unwrap().clone()).collect(),
            b.hi[..d].iter().map(|x| x.finite().unwrap().clone()).collect()).unwrap()).collect();
        let u = union_of(d, &bs);
        prop_assert!(u.is_canonical());
        prop_assert!(u.boxes_pairwise_disjoint());
        prop_assert_eq!(union_of(d, &u.boxes()), u.clone());
        let mut rev = bs.clone();
        rev.reverse();
        prop_assert_eq!(union_of(d, &rev), u);
    }

    #[test]
    fn boolean_ops_match_point_oracle(a in boxes(2, 4), b in boxes(2, 4)) {
        let (ua, ub) = (union_of(2, &a), union_of(2, &b));
        let or = ua.union(&ub).unwrap();
        let and = ua.intersect(&ub).unwrap();
        let minus = ua.subtract(&ub).unwrap();
        for x in probe_points(2) {
            let (ia, ib) = (in_any(&a, &x), in_any(&b, &x));
            prop_assert_eq!(or.contains_point(&x), ia || ib);
            prop_assert_eq!(and.contains_point(&x), ia && ib);
            prop_assert_eq!(minus.contains_point(&x), ia && !ib);
        }
    }

    #[test]
    fn measure_additivity(a in boxes(2, 4), b in boxes(2, 4)) {
        let (ua, ub) = (union_of(2, &a), union_of(2, &b));
        let lhs = ua.measure().unwrap() + ub.measure().unwrap();
        let rhs = ua.union(&ub).unwrap().measure().unwrap() + ua.intersect(&ub).unwrap().measure().unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inclusion_exclusion_three_boxes(bs in proptest::collection::vec(grid_box(3, 0, 8, 4), 3)) {
        let v = |b: &Aabb| b.volume().unwrap();
        let i = |x: &Aabb, y: &Aabb| x.intersect(y).unwrap();
        let expected = v(&bs[0]) + v(&bs[1]) + v(&bs[2])
            - v(&i(&bs[0], &bs[1])) - v(&i(&bs[0], &bs[2])) - v(&i(&bs[1], &bs[2]))
            + v(&i(&i(&bs[0], &bs[1]), &bs[2]));
        prop_assert_eq!(union_of(3, &bs).measure().unwrap(), expected);
    }

    #[test]
    fn boolean_laws(a in boxes(2, 3), b in boxes(2, 3), c in boxes(2, 3)) {
        let (a, b, c) = (union_of(2, &a), union_of(2, &b), union_of(2, &c));
        prop_assert_eq!(a.union(&b).unwrap(), b.union(&a).unwrap());
        prop_assert_eq!(a.intersect(&b).unwrap(), b.intersect(&a).unwrap());
        prop_assert_eq!(
            a.intersect(&b.union(&c).unwrap()).unwrap(),
            a.intersect(&b).unwrap().union(&a.intersect(&c).unwrap()).unwrap()
        );
        // a \ (a \ b) = a ∩ b
        prop_assert_eq!(a.subtract(&a.subtract(&b).unwrap()).unwrap(), a.intersect(&b).unwrap());
        prop_assert!(a.subtract(&b).unwrap().is_disjoint_from(&b).unwrap());
    }

    #[test]
    fn translate_round_trip(a in boxes(2, 4), t in proptest::collection::vec(-20i64..20, 2)) {
        let u = union_of(2, &a);
        let v: Vec<Q> = t.iter().map(|k| r(*k, 3)).collect();
        let back: Vec<Q> = v.iter().map(|x| -x).collect();
        let moved = u.translate(&v).unwrap();
        prop_assert_eq!(moved.measure().unwrap(), u.measure().unwrap());
        prop_assert_eq!(moved.translate(&back).unwrap(), u);
    }

    #[test]
    fn tile_check_counts(
        sides in proptest::collection::vec(1i64..6, 1..=3),
        ratios in proptest::collection::vec((1i64..5, 1i64..5), 3),
    ) {
        let d = sides.len();
        let base = Aabb::from_q(vec![Q::zero(); d], sides.iter().map(|s| r(*s, 2)).collect()).unwrap();
        let qs: Vec<Q> = ratios[..d].iter().map(|(p, q)| r(*p, *q)).collect();
        let rep = tile_check(&base, &qs).unwrap();
        prop_assert!(rep.holds);
        // independent count: prod(numerators) cells of volume |base| / prod(denominators)
        let ratio: Q = qs.iter().fold(Q::from_integer(1.into()), |acc, x| acc * x);
        prop_assert_eq!(rep.scaled_measure.clone(), base.volume().unwrap() * ratio);
        prop_assert_eq!(rep.counted_measure, rep.scaled_measure);
    }
}

/// Sign of `a + b sqrt(r)` from integer square-root brackets, when the
/// bracket is conclusive.
fn bracket_sign(a: &Q, b: &Q, rad: u32) -> Option<Ordering> {
    let scale = BigInt::from(10u32).pow(30);
    let lo_root = (BigInt::from(rad) * &scale * &scale).sqrt();
    let lo = Q::new(lo_root.clone(), scale.clone());
    let hi = Q::new(lo_root + 1, scale);
    let (x, y) = (a + b * &lo, a + b * &hi);
    let (min, max) = if x <= y { (x, y) } else { (y, x) };
    if min.is_positive() {
        Some(Ordering::Greater)
    } else if max.is_negative() {
        Some(Ordering::Less)
    } else if b.is_zero() && a.is_zero() {
        Some(Ordering::Equal)
    } else {
        None
    }
}

proptest! {
    #[test]
    fn surd_order_matches_bracket_oracle(
        an in -400i64..400, ad in 1i64..40, bn in -400i64..400, bd in 1i64..40, rad in 1u32..12,
        cn in -400i64..400, cd in 1i64..40, dn in -400i64..400, dd in 1i64..40,
    ) {
        let x = ExtendedRational::new(r(an, ad), r(bn, bd), rad);
        let y = ExtendedRational::new(r(cn, cd), r(dn, dd), rad);
        let diff = &x - &y;
        if let Some(expected) = bracket_sign(&diff.a, &diff.b, rad) {
            prop_assert_eq!(x.cmp(&y), expected);
        }
        // ring identities
        let s = ExtendedRational::surd(r(1, 1), rad);
        prop_assert_eq!(&s * &s, ExtendedRational::rational(r(rad as i64, 1), rad));
        prop_assert_eq!(&(&x + &y) - &y, x.clone());
    }
}

#[test]
fn volume_examples() {
    assert_eq!(Aabb::unit(2).volume().unwrap(), r(1, 1));
    assert_eq!(Aabb::from_q(vec![r(1, 3)], vec![r(1, 3)]).unwrap().volume().unwrap(), r(0, 1));
    let b = Aabb::from_q(vec![r(0, 1), r(0, 1)], vec![r(3, 8), r(1, 2)]).unwrap();
    assert_eq!(b.volume().unwrap(), r(3, 16));
    assert!(Aabb::below(1, 0, r(1, 2)).volume().is_err());
}

#[test]
fn surd_exact_equality_on_squares() {
    // 2 sqrt 4 = 4
    let x = ExtendedRational::new(r(0, 1), r(2, 1), 4);
    assert_eq!(x, ExtendedRational::rational(r(4, 1), 4));
    let json = serde_json::to_string(&ExtendedRational::new(r(1, 2), r(-3, 1), 2)).unwrap();
    assert_eq!(json, r#"{"a":"1/2","b":"-3/1","sqrt":2}"#);
}
