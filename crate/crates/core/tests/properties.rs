use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;

use skewlab::closing::{close_orbit, find_near_returns, is_periodic, verify_shadowing};
use skewlab::cocycle::{
    birkhoff_sum, orbit_weight, periodic_data, truncation_perturbation, Cocycle,
    DEFAULT_ENUMERATION_BUDGET,
};
use skewlab::construction::{construct_inseparable, truncation_certificate};
use skewlab::separation::{self, Verdict};
use skewlab::sequence::{functional_apply, product_metric, LinearFunctional, SeqVector};
use skewlab::skew::{coverage_from, GridSpec, SkewOrbit, SkewState};
use skewlab::torus::{
    periodic_points, torus_distance, RationalTorusPoint, ToralAutomorphism, TorusPoint,
};

type Q = BigRational;

fn cat() -> &'static ToralAutomorphism {
    static A: OnceLock<ToralAutomorphism> = OnceLock::new();
    A.get_or_init(ToralAutomorphism::cat_map)
}

fn inseparable() -> &'static Cocycle {
    static F: OnceLock<Cocycle> = OnceLock::new();
    F.get_or_init(|| {
        construct_inseparable(cat(), 3, 4, DEFAULT_ENUMERATION_BUDGET)
            .unwrap()
            .0
    })
}

fn unit() -> impl Strategy<Value = f64> {
    0.0..1.0f64
}

fn point2() -> impl Strategy<Value = TorusPoint> {
    (unit(), unit()).prop_map(|(a, b)| TorusPoint::new(vec![a, b]).unwrap())
}

fn point(dim: usize) -> impl Strategy<Value = TorusPoint> {
    prop::collection::vec(unit(), dim).prop_map(|c| TorusPoint::new(c).unwrap())
}

fn seq() -> impl Strategy<Value = SeqVector> {
    prop::collection::vec(-100.0..100.0f64, 0..8).prop_map(SeqVector::new)
}

fn rational_points() -> impl Strategy<Value = Vec<Vec<Q>>> {
    (2usize..=4).prop_flat_map(|d| {
        prop::collection::vec(prop::collection::vec((-6i64..=6, 1i64..=6), d), 1..=20).prop_map(
            |pts| {
                pts.into_iter()
                    .map(|p| {
                        p.into_iter()
                            .map(|(n, m)| Q::new(n.into(), m.into()))
                            .collect()
                    })
                    .collect()
            },
        )
    })
}

fn qdot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torus_distance_is_a_bounded_metric(
        (d, x, y, z) in (1usize..=4).prop_flat_map(|d| (Just(d), point(d), point(d), point(d)))
    ) {
        let dxy = torus_distance(&x, &y).unwrap();
        let dyz = torus_distance(&y, &z).unwrap();
        let dxz = torus_distance(&x, &z).unwrap();
        prop_assert!(dxy <= (d as f64).sqrt() / 2.0 + 1e-15);
        prop_assert_eq!(torus_distance(&x, &x).unwrap(), 0.0);
        prop_assert_eq!(dxy, torus_distance(&y, &x).unwrap());
        prop_assert!(dxz <= dxy + dyz + 1e-12);
    }

    #[test]
    fn exact_and_float_maps_agree(nums in prop::collection::vec(0i64..999_983, 2), den in 2i64..999_983) {
        let p = RationalTorusPoint::from_i64(&[nums[0] % den, nums[1] % den], den).unwrap();
        let exact = cat().apply_exact(&p).unwrap().to_torus_point();
        let float = cat().apply(&p.to_torus_point()).unwrap();
        prop_assert!(torus_distance(&exact, &float).unwrap() <= 2f64.powi(-40));
    }

    #[test]
    fn product_metric_axioms(a in seq(), b in seq(), c in seq()) {
        let dab = product_metric(&a, &b);
        prop_assert!((0.0..1.0).contains(&dab));
        prop_assert_eq!(product_metric(&a, &a), 0.0);
        prop_assert_eq!(dab, product_metric(&b, &a));
        prop_assert!(product_metric(&a, &c) <= dab + product_metric(&b, &c) + 1e-12);
        if dab == 0.0 {
            prop_assert_eq!(a.padded(8), b.padded(8));
        }
    }

    #[test]
    fn product_metric_translation_invariant(a in prop::collection::vec(-10i32..10, 0..8),
                                            b in prop::collection::vec(-10i32..10, 0..8),
                                            c in prop::collection::vec(-10i32..10, 0..8)) {
        // Integer entries keep the sums exact.
        let v = |x: &[i32]| SeqVector::new(x.iter().map(|&t| f64::from(t)).collect());
        let (a, b, c) = (v(&a), v(&b), v(&c));
        prop_assert_eq!(product_metric(&(&a + &c), &(&b + &c)), product_metric(&a, &b));
    }

    #[test]
    fn functional_sees_only_its_level(coeffs in prop::collection::vec(-5.0..5.0f64, 1..5), a in seq()) {
        prop_assume!(coeffs.iter().any(|&c| c != 0.0));
        let l = LinearFunctional::new(coeffs).unwrap();
        let full = functional_apply(&l, &a);
        let cut = functional_apply(&l, &a.truncate(l.level()));
        prop_assert_eq!(full, cut);
    }

    #[test]
    fn birkhoff_cocycle_identity(x in point2(), k in 0u64..200, m in 0u64..200) {
        let f = inseparable();
        let a = cat();
        let mut y = x.clone();
        for _ in 0..m {
            y = a.apply(&y).unwrap();
        }
        let whole = birkhoff_sum(f, a, &x, k + m).unwrap();
        let split = &birkhoff_sum(f, a, &y, k).unwrap() + &birkhoff_sum(f, a, &x, m).unwrap();
        for (u, v) in whole.padded(3).iter().zip(split.padded(3)) {
            prop_assert!((u - v).abs() <= 1e-9);
        }
    }

    #[test]
    fn evaluate_is_lipschitz(x in point2(), y in point2()) {
        let f = inseparable();
        let l: f64 = f.lipschitz_constants().iter().enumerate()
            .map(|(k, lk)| 0.5f64.powi(k as i32 + 1) * lk)
            .sum();
        let d = product_metric(&f.evaluate(&x).unwrap(), &f.evaluate(&y).unwrap());
        prop_assert!(d <= l * torus_distance(&x, &y).unwrap() + 1e-15);
    }

    #[test]
    fn separable_witnesses_are_exact(pts in rational_points()) {
        let cert = separation::decide(&pts).unwrap();
        prop_assert!(cert.verify(&pts));
        if let Some(v) = cert.functional() {
            prop_assert!(v.iter().any(|c| !c.is_zero()));
            prop_assert!(pts.iter().all(|p| !qdot(v, p).is_negative()));
        }
        let cover = separation::orthant_coverage(&pts).unwrap();
        if cover.covered {
            prop_assert!(separation::separating_functional(&pts).unwrap().is_none());
            for &i in cover.cover.values() {
                prop_assert!(pts[i].iter().all(|c| !c.is_zero()));
            }
        }
    }

    #[test]
    fn verdict_is_scale_invariant(pts in rational_points(), n in 1i64..100, m in 1i64..100) {
        let s = Q::new(n.into(), m.into());
        let scaled: Vec<Vec<Q>> = pts.iter().map(|p| p.iter().map(|c| c * &s).collect()).collect();
        prop_assert_eq!(
            separation::decide(&pts).unwrap().verdict,
            separation::decide(&scaled).unwrap().verdict
        );
    }

    #[test]
    fn skew_orbit_is_equivariant_in_the_fiber(x in point2(),
                                              v in prop::collection::vec(-4i32..4, 3),
                                              k in 1u64..500) {
        let f = inseparable();
        let shift = SeqVector::new(v.iter().map(|&t| f64::from(t) * 0.25).collect());
        let from_zero = SkewOrbit::new(cat(), f, &SkewState::at_zero(x.clone()), k).unwrap();
        let shifted = SkewOrbit::new(cat(), f, &SkewState { base: x, fiber: shift.clone() }, k).unwrap();
        for (s0, s1) in from_zero.zip(shifted) {
            prop_assert_eq!(s0.base, s1.base);
            let expect = &s0.fiber + &shift;
            for (u, w) in expect.padded(3).iter().zip(s1.fiber.padded(3)) {
                prop_assert!((u - w).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn coverage_is_monotone_and_consistent(x in point2(), k in 1u64..4000) {
        let grid = GridSpec { level: 2, half_width: 1.0, base_subdivisions: 4, fiber_subdivisions: 4 };
        let start = SkewState::at_zero(x);
        let short = coverage_from(cat(), inseparable(), &start, k, grid).unwrap();
        let long = coverage_from(cat(), inseparable(), &start, 2 * k, grid).unwrap();
        prop_assert!(short.hit() <= long.hit());
        let r = long.report();
        prop_assert_eq!(r.boxes_total, 4u64 * 4 * 4 * 4);
        prop_assert!(r.boxes_hit <= r.boxes_total);
        prop_assert_eq!(r.fraction_hit, r.boxes_hit as f64 / r.boxes_total as f64);
        prop_assert!(r.fiber_cells_hit as u64 <= r.boxes_hit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closed_orbits_are_exactly_periodic(n in 1u32..=8, pick in any::<prop::sample::Index>(),
                                          dx in -1e-6..1e-6f64, dy in -1e-6..1e-6f64) {
        // Start next to a period-n point so that a near-return at n exists.
        let set = periodic_points(cat(), n).unwrap();
        let q = set.points[pick.index(set.count())].to_torus_point();
        let x = q.translate(&[dx, dy]);
        let near = find_near_returns(cat(), &x, 1e-2, n).unwrap();
        let hit = near.iter().find(|r| r.n == n).expect("return at n");
        let p = close_orbit(cat(), hit).unwrap();
        prop_assert!(is_periodic(cat(), &p, n));
        let report = verify_shadowing(cat(), &x, &p, n).unwrap();
        prop_assert!(report.within(10.0));
    }
}

#[test]
fn periodic_counts_match_determinant() {
    for n in 1..=8 {
        let set = periodic_points(cat(), n).unwrap();
        assert_eq!(
            BigInt::from(set.count()),
            cat().fixed_point_count(n).unwrap()
        );
    }
}

#[test]
fn weights_are_orbit_invariants() {
    let f = inseparable();
    for orbit in &periodic_points(cat(), 4).unwrap().orbits {
        let w0 = orbit_weight(f, cat(), &orbit.base, orbit.period);
        for p in orbit.points(cat()) {
            let w = orbit_weight(f, cat(), &p, orbit.period);
            for (u, v) in w0.padded(3).iter().zip(w.padded(3)) {
                assert!((u - v).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn truncations_are_separable_by_the_next_coordinate() {
    let f = inseparable();
    for n in 1..f.len() {
        let cert = truncation_certificate(f, cat(), n, 4, DEFAULT_ENUMERATION_BUDGET)
            .unwrap()
            .expect("coordinate n+1 is live");
        assert_eq!(cert.verdict, Verdict::Separable);
        let v = cert.functional().unwrap();
        assert!(v[..n].iter().all(Zero::is_zero));
        assert_eq!(v[n].to_i64(), Some(1));
        let g = truncation_perturbation(f, n);
        let data = periodic_data(&g, cat(), 4, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert!(cert.verify(&separation::rationalize(&data.weights_at_level(n + 1))));
    }
}

#[test]
fn construction_supports_are_disjoint() {
    let a = cat();
    let (_, log) = construct_inseparable(a, 4, 4, DEFAULT_ENUMERATION_BUDGET).unwrap();
    assert!(log.supports_disjoint);
    assert!(2.0 * log.radius < log.min_point_distance);
}
