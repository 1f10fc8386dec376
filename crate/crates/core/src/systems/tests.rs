use num_bigint::BigInt;
use proptest::prelude::*;

use super::*;

fn q(n: i128, d: i128) -> Scalar {
    Scalar::rational(n, d).unwrap()
}

fn pt(v: &[Scalar]) -> Point {
    Point::torus(v.to_vec())
}

#[test]
fn skew2_closed_form() {
    let sys = SystemSpec::Skew2(q(1, 5));
    let got = orbit_eval(&sys, &pt(&[Scalar::zero(), Scalar::zero()]), 7).unwrap();
    assert_eq!(got, pt(&[q(2, 5), q(1, 5)]));
}

#[test]
fn skews_closed_form() {
    let a = Scalar::sqrt2_minus_1();
    let sys = SystemSpec::SkewS(a);
    let got = orbit_eval(&sys, &sys.origin(), 3).unwrap();
    assert_eq!(got, pt(&[Scalar::fixed(a.fixed_bits().wrapping_mul(3)), Scalar::fixed(a.fixed_bits().wrapping_mul(9))]));
}

#[test]
fn cyclic_wraps() {
    assert_eq!(orbit_eval(&SystemSpec::Cyclic(4), &Point::Residue(1), 6).unwrap(), Point::Residue(3));
    assert_eq!(orbit_eval(&SystemSpec::Cyclic(4), &Point::Residue(1), -6).unwrap(), Point::Residue(3));
}

#[test]
fn arc_membership_is_strict() {
    let sys = SystemSpec::TorusRot(vec![q(1, 4)]);
    let r = Region::arc(Scalar::zero(), q(3, 10)).unwrap();
    assert!(region_contains(&sys, &r, &pt(&[q(1, 5)])).unwrap().definitely_inside());
    assert!(!region_contains(&sys, &r, &pt(&[q(3, 10)])).unwrap().inside);
    assert!(!region_contains(&sys, &r, &pt(&[Scalar::zero()])).unwrap().inside);
    // wrapping arc (0.9, 0.2)
    let w = Region::arc(q(9, 10), q(1, 5)).unwrap();
    assert!(region_contains(&sys, &w, &pt(&[q(1, 20)])).unwrap().inside);
    assert!(!region_contains(&sys, &w, &pt(&[q(1, 2)])).unwrap().inside);
}

#[test]
fn preimage_translates_arcs() {
    let sys = SystemSpec::TorusRot(vec![q(1, 4)]);
    let r = Region::arc(Scalar::zero(), q(3, 10)).unwrap();
    let pre = preimage_region(&sys, &r, 1).unwrap();
    assert_eq!(pre, Region::arc(q(3, 4), q(1, 20)).unwrap());
    assert!(matches!(preimage_region(&SystemSpec::Skew2(q(1, 5)), &Region::Full, 1), Err(SystemError::NotRotation(_))));
}

#[test]
fn chacon_orbit_and_cylinders() {
    let sys = SystemSpec::chacon(3).unwrap();
    assert_eq!(orbit_eval(&sys, &Point::WordIndex(0), 5).unwrap(), Point::WordIndex(5));
    assert!(matches!(orbit_eval(&sys, &Point::WordIndex(0), 40), Err(SystemError::ChaconRange { .. })));
    let r: Region = "cyl{10}".parse().unwrap();
    assert!(region_contains(&sys, &r, &Point::WordIndex(2)).unwrap().inside);
    assert!(!region_contains(&sys, &r, &Point::WordIndex(3)).unwrap().inside);
    let not_factor: Region = "cyl{11}".parse().unwrap();
    assert!(region_contains(&sys, &not_factor, &Point::WordIndex(0)).is_err());
    // a cylinder read past the end of the word is an error, not "outside"
    assert!(region_contains(&sys, &r, &Point::WordIndex(39)).is_err());
}

#[test]
fn shape_mismatch_is_reported() {
    let sys = SystemSpec::TorusRot(vec![q(1, 3), q(1, 5)]);
    assert!(matches!(orbit_eval(&sys, &pt(&[q(1, 2)]), 1), Err(SystemError::Shape(_))));
    assert!(region_contains(&sys, &"res{1}".parse().unwrap(), &sys.origin()).is_err());
}

#[test]
fn huge_iterates_use_big_integers() {
    let sys = SystemSpec::Skew2(q(1, 7));
    let n = BigInt::from(10).pow(40) + 3;
    let got = orbit_eval_big(&sys, &sys.origin(), &n).unwrap();
    // the orbit of the origin has period 14 when alpha = 1/7
    let r: i128 = (&n % 14u32).try_into().unwrap();
    assert_eq!(got, orbit_eval(&sys, &sys.origin(), r).unwrap());
    assert_eq!(r, 7);
}

#[test]
fn serde_uses_the_text_form() {
    let sys = SystemSpec::product(SystemSpec::Cyclic(3), SystemSpec::Skew2(q(1, 5)));
    let j = serde_json::to_string(&sys).unwrap();
    assert_eq!(j, "\"product(cyclic(3), skew2(1/5))\"");
    assert_eq!(serde_json::from_str::<SystemSpec>(&j).unwrap(), sys);
}

fn any_scalar() -> impl Strategy<Value = Scalar> {
    prop_oneof![
        (0i128..60, 1i128..60).prop_map(|(n, d)| q(n, d)),
        any::<u128>().prop_map(Scalar::fixed),
    ]
}

fn any_rotation() -> impl Strategy<Value = SystemSpec> {
    let leaf = prop_oneof![
        (1u64..12).prop_map(SystemSpec::Cyclic),
        prop::collection::vec(any_scalar(), 1..3).prop_map(SystemSpec::TorusRot),
        any_scalar().prop_map(SystemSpec::Skew2),
        any_scalar().prop_map(SystemSpec::SkewS),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SystemSpec::product(a, b)),
            (inner.clone(), -4i64..5).prop_map(|(a, k)| SystemSpec::power(a, k)),
            (inner, 1usize..3).prop_map(|(a, d)| SystemSpec::diagonal(a, d)),
        ]
    })
}

/// A point of the right shape derived from `seed`.
fn point_for(sys: &SystemSpec, seed: u64) -> Point {
    match sys {
        SystemSpec::Cyclic(k) => Point::Residue(seed % k),
        SystemSpec::TorusRot(a) => Point::Torus((0..a.len()).map(|i| q((seed as i128 + i as i128) % 11, 11)).collect()),
        SystemSpec::Skew2(_) | SystemSpec::SkewS(_) => Point::Torus(vec![q(seed as i128 % 13, 13), q(seed as i128 % 5, 5)]),
        SystemSpec::Chacon(_) => Point::WordIndex(0),
        SystemSpec::Product(a, b) => Point::pair(point_for(a, seed), point_for(b, seed / 2 + 1)),
        SystemSpec::Power(a, _) => point_for(a, seed),
        SystemSpec::Diagonal(a, d) => Point::Tuple((0..=*d as u64).map(|i| point_for(a, seed + i)).collect()),
    }
}

/// Same shape as [`point_for`], every coordinate fixed point.
fn fixed_point_for(sys: &SystemSpec, seed: u64) -> Point {
    fn fix(p: Point, h: u128) -> Point {
        let h2 = h.wrapping_mul(0x9e3779b97f4a7c15f39cc0605cedc835).wrapping_add(1);
        match p {
            Point::Torus(c) => Point::Torus(
                (0..c.len() as u128).map(|i| Scalar::fixed(h2.wrapping_mul(i + 3).rotate_left(17))).collect(),
            ),
            Point::Pair(a, b) => Point::pair(fix(*a, h2), fix(*b, h2 ^ 0x55)),
            Point::Tuple(v) => Point::Tuple(v.into_iter().enumerate().map(|(i, p)| fix(p, h2 + i as u128)).collect()),
            other => other,
        }
    }
    fix(point_for(sys, seed), seed as u128)
}

/// Compares points in the `2^128` ring, where rationals and their
/// fixed-point images coincide.
fn same(sys: &SystemSpec, a: &Point, b: &Point) -> bool {
    let c = flat::Compiled::new(sys, crate::polys::Modulus::Pow128).unwrap();
    c.flatten_point(a).unwrap() == c.flatten_point(b).unwrap()
}

proptest! {
    #[test]
    fn group_law(sys in any_rotation(), seed in 0u64..1000, m in -500i128..500, n in -500i128..500) {
        let x = point_for(&sys, seed);
        let a = orbit_eval(&sys, &orbit_eval(&sys, &x, n).unwrap(), m).unwrap();
        let b = orbit_eval(&sys, &x, m + n).unwrap();
        prop_assert!(same(&sys, &a, &b));
        prop_assert!(same(&sys, &orbit_eval(&sys, &x, 0).unwrap(), &x));
    }

    #[test]
    fn closed_form_matches_iteration(sys in any_rotation(), seed in 0u64..1000, n in 0i128..40) {
        let x = point_for(&sys, seed);
        let mut y = x.clone();
        for _ in 0..n {
            y = orbit_eval(&sys, &y, 1).unwrap();
        }
        prop_assert!(same(&sys, &y, &orbit_eval(&sys, &x, n).unwrap()));
    }

    #[test]
    fn closed_form_matches_direct_steps(sys in any_rotation(), seed in 0u64..1000, n in -60i64..60) {
        // fixed starts never add two rationals, so step and ring agree bit for bit
        let x = fixed_point_for(&sys, seed);
        prop_assert!(same(&sys, &iterate(&sys, &x, n).unwrap(), &orbit_eval(&sys, &x, n as i128).unwrap()));
        if sys.scalars().iter().all(|s| !s.is_fixed()) {
            let x = point_for(&sys, seed);
            prop_assert_eq!(iterate(&sys, &x, n).unwrap(), orbit_eval(&sys, &x, n as i128).unwrap());
        }
    }

    #[test]
    fn power_and_diagonal_agree(sys in any_rotation(), seed in 0u64..1000, k in -3i64..4, n in -50i128..50) {
        let x = point_for(&sys, seed);
        let p = SystemSpec::power(sys.clone(), k);
        prop_assert!(same(&sys, &orbit_eval(&p, &x, n).unwrap(), &orbit_eval(&sys, &x, n * k as i128).unwrap()));
        let d = SystemSpec::diagonal(sys.clone(), 2);
        let got = orbit_eval(&d, &Point::Tuple(vec![x.clone(), x.clone(), x.clone()]), n).unwrap();
        let want = Point::Tuple((0..3).map(|i| orbit_eval(&sys, &x, n * i).unwrap()).collect());
        prop_assert!(same(&d, &got, &want));
    }

    #[test]
    fn skew2_inverse(a in any_scalar(), seed in 0u64..1000, n in -1000i128..1000) {
        let sys = SystemSpec::Skew2(a);
        let x = point_for(&sys, seed);
        let back = orbit_eval(&sys, &orbit_eval(&sys, &x, n).unwrap(), -n).unwrap();
        prop_assert!(same(&sys, &back, &x));
    }

    #[test]
    fn preimage_is_exact_for_rationals(n in 1i128..30, d in 2i128..30, shift in -20i128..20, seed in 0u64..100) {
        let sys = SystemSpec::TorusRot(vec![q(n, d)]);
        let r = Region::arc(q(1, 7), q(3, 5)).unwrap();
        let pre = preimage_region(&sys, &r, shift).unwrap();
        let x = pt(&[q(seed as i128, 97)]);
        let moved = orbit_eval(&sys, &x, shift).unwrap();
        prop_assert_eq!(
            region_contains(&sys, &pre, &x).unwrap().inside,
            region_contains(&sys, &r, &moved).unwrap().inside
        );
    }
}
