use approx::assert_abs_diff_eq;
use divstab::filtrations::{self, ExpectedOrder, FiltrationSpec};
use divstab::rational::{int, ratio};
use divstab::{catalog, GeometryModel, Tolerances, Valuation};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn surface_volume_is_quadratic(a in 1i64..6, b in 0i64..4, p in 1i64..5, q in 1i64..5) {
        let bl = catalog::blowup_p2_surface();
        let d = bl.class(&[a, -b]);
        let c = ratio(p, q);
        let lhs = bl.volume(&d.scaled(&c)).unwrap();
        prop_assert_eq!(lhs, &c * &c * bl.volume(&d).unwrap());
    }

    #[test]
    fn toric_volume_is_quadratic(a in 0i64..3, b in 0i64..3, c in 0i64..3, d in 0i64..3, p in 1i64..5, q in 1i64..5) {
        let f1 = catalog::f1_toric();
        let l = f1.class(&[a, b, c, d]);
        let s = ratio(p, q);
        let lhs = f1.volume(&l.scaled(&s)).unwrap();
        prop_assert_eq!(lhs, &s * &s * f1.volume(&l).unwrap());
    }

    #[test]
    fn expected_order_is_translation_equivariant(t0 in 0.0f64..2.0, t1 in 0.0f64..2.0, c in -1.5f64..1.5) {
        let bl = catalog::blowup_p2_surface();
        let l = bl.class(&[3, -1]);
        let support = [bl.valuation("ord_E").unwrap(), bl.valuation("line").unwrap()];
        let s = ExpectedOrder::new(&bl, &l, &support, Tolerances::default()).unwrap();
        let base = s.eval(&[t0, t1]).unwrap();
        let moved = s.eval(&[t0 + c, t1 + c]).unwrap();
        prop_assert!((moved - base - c).abs() < 1e-9);
    }

    #[test]
    fn expected_order_is_homogeneous(t0 in 0.0f64..2.0, t1 in 0.0f64..2.0, p in 1i64..4, q in 1i64..4) {
        let qt = catalog::p1xp1_toric();
        let l = qt.class(&[1, 1, 1, 1]);
        let c = ratio(p, q);
        let cf = p as f64 / q as f64;
        let support = [qt.valuation("e1").unwrap(), qt.valuation("exc").unwrap()];
        let tol = Tolerances::default();
        let s = ExpectedOrder::new(&qt, &l, &support, tol).unwrap().eval(&[t0, t1]).unwrap();
        let scaled = ExpectedOrder::new(&qt, &l.scaled(&c), &support, tol).unwrap().eval(&[cf * t0, cf * t1]).unwrap();
        prop_assert!((scaled - cf * s).abs() < 1e-8);
    }
}

#[test]
fn trivial_valuation_is_a_hard_cutoff() {
    let p2 = catalog::p2_surface();
    let l = p2.class(&[3]);
    let support = [p2.valuation("line").unwrap(), Valuation::trivial()];
    let s = ExpectedOrder::new(&p2, &l, &support, Tolerances::default()).unwrap();
    // cutoff below the line's jumps: S = t0 + (1/9) int_0^{t1 - t0} (3 - x)^2 dx
    let x = 1.5f64;
    let expected = (27.0 - (3.0 - x).powi(3)) / 27.0;
    assert_abs_diff_eq!(s.eval(&[0.0, x]).unwrap(), expected, epsilon = 1e-12);
    // cutoff at or above gamma leaves S(line) = 1
    assert_abs_diff_eq!(s.eval(&[0.0, 3.0]).unwrap(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(s.eval(&[0.0, 10.0]).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn finite_level_mean_order_converges_from_one_side() {
    // the trapezoid of -K on Bl_p P2 is not symmetric along e1, so the
    // lattice average misses the centroid by O(1/k)
    let bl = catalog::blowup_p2_toric();
    let l = bl.class(&[1, 1, 1, 1]);
    let e1 = bl.valuation("e1").unwrap();
    let s = ExpectedOrder::new(&bl, &l, std::slice::from_ref(&e1), Tolerances::default()).unwrap().eval(&[0.0]).unwrap();
    let spec = FiltrationSpec::single(e1);
    let mut last = f64::INFINITY;
    for k in [5, 10, 20, 40, 80] {
        let prof = filtrations::filtration_volume_finite_k(&bl, &l, &spec, k).unwrap();
        let err = (prof.normalized_volume() - s).abs();
        assert!(err > 1e-6, "k = {k}: error {err} unexpectedly vanished");
        assert!(err < last, "k = {k}: error {err} did not decrease from {last}");
        last = err;
    }
    assert!(last < 0.02);
}

#[test]
fn restriction_never_increases_volume() {
    let f1 = catalog::f1_surface();
    let l = f1.class(&[3, 2]);
    let support: Vec<Valuation> = ["ord_s", "fiber", "section"].iter().map(|n| f1.valuation(n).unwrap()).collect();
    for shifts in [[0.0, 0.0, 0.0], [0.5, 0.1, 1.2], [1.0, 2.0, 0.3]] {
        let spec = FiltrationSpec::new(support.clone(), shifts.to_vec()).unwrap();
        for keep in [&["ord_s"][..], &["fiber", "section"][..]] {
            let w = filtrations::restriction_inequality_check(&f1, &l, &spec, keep, Tolerances::default()).unwrap();
            assert!(w.holds, "{keep:?} at {shifts:?}: {} > {}", w.superset_volume, w.subset_volume);
        }
    }
}

#[test]
fn volume_of_p2_multiples() {
    let p2 = catalog::p2_toric();
    for a in 0..6 {
        assert_eq!(p2.volume(&p2.class(&[0, 0, a])).unwrap(), int(a * a));
    }
}
