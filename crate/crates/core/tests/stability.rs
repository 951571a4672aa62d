use divstab::rational::{self, ratio};
use divstab::stability::{self, Settings, Side};
use divstab::filtrations::{self, FiltrationSpec};
use divstab::{catalog, DivisorialMeasure, Execution, GeometryModel, Tolerances};

fn settings() -> Settings {
    Settings {
        starts: 4,
        ..Settings::default()
    }
}

fn measure(model: &dyn GeometryModel, atoms: &[(&str, i64, i64)]) -> DivisorialMeasure {
    DivisorialMeasure::new(atoms.iter().map(|(n, p, q)| (model.valuation(n).unwrap(), ratio(*p, *q))).collect()).unwrap()
}

#[test]
fn beta_along_the_anticanonical_class_is_entropy_minus_norm() {
    // ||mu|| is homogeneous of degree one in L, so at L = -K both one-sided
    // derivatives in the direction K equal -||mu||
    for (name, atoms) in [
        ("Bl_pP2", vec![("ord_E", 1, 2), ("line", 1, 2)]),
        ("F1_toric", vec![("ord_s", 1, 3), ("fiber", 2, 3)]),
        ("P1xP1", vec![("fiber1", 1, 1)]),
    ] {
        let model = catalog::by_name(name).unwrap();
        let l = catalog::anticanonical(&*model);
        let mu = measure(&*model, &atoms);
        let b = stability::beta(&*model, &l, &mu, &settings()).unwrap();
        let expected = rational::to_f64(&stability::entropy(&mu)) - b.norm;
        assert!((b.beta - expected).abs() < 1e-6, "{name}: beta {} vs {expected}", b.beta);
    }
}

#[test]
fn right_derivative_dominates_left() {
    let bl = catalog::blowup_p2_surface();
    let l = bl.class(&[3, -1]);
    let mu = measure(&bl, &[("ord_E", 1, 2), ("ord_fiber", 1, 4), ("line", 1, 4)]);
    let s = settings();
    let n = stability::norm(&bl, &l, &mu, &s).unwrap();
    for h in [bl.class(&[1, 0]), bl.class(&[0, -1]), bl.class(&[-1, 1])] {
        let right = stability::danskin_from(&bl, &l, &mu, &n, &h, Side::Right, &s).unwrap();
        let left = stability::danskin_from(&bl, &l, &mu, &n, &h, Side::Left, &s).unwrap();
        assert!(right >= left - 1e-9, "{h:?}: right {right} < left {left}");
    }
}

#[test]
fn dirac_norm_is_the_expected_order() {
    // a single atom makes g(t) = S(t) - t constant, equal to S at t = 0
    let bl = catalog::blowup_p2_surface();
    let l = bl.class(&[3, -1]);
    for name in ["ord_E", "ord_fiber", "line"] {
        let v = bl.valuation(name).unwrap();
        let n = stability::norm(&bl, &l, &DivisorialMeasure::dirac(v.clone()), &settings()).unwrap();
        let direct = filtrations::expected_order_s(&bl, &l, &FiltrationSpec::single(v), Tolerances::default()).unwrap();
        assert!((n.value - direct).abs() < 1e-9, "{name}: {} vs {direct}", n.value);
        if name == "ord_E" {
            assert!((n.value - 7.0 / 6.0).abs() < 1e-9);
        }
    }
}

#[test]
fn strategies_agree() {
    let model = catalog::blowup_p2_toric();
    let l = catalog::anticanonical(&model);
    let mu = measure(&model, &[("ord_E", 1, 3), ("e1", 1, 3), ("e3", 1, 3)]);
    let seq = stability::norm(&model, &l, &mu, &Settings { execution: Execution::Sequential, ..settings() }).unwrap();
    let par = stability::norm(&model, &l, &mu, &Settings { execution: Execution::Parallel, ..settings() }).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn delta_of_the_plane_is_one() {
    let p2 = catalog::p2_toric();
    let candidates = stability::toric_candidates(&p2, 2).unwrap();
    let d = stability::delta_anticanonical(&p2, &candidates, &settings()).unwrap();
    assert!((d.value - 1.0).abs() < 1e-8, "{}", d.value);
    assert!(d.ratios.iter().all(|r| r.3 >= 1.0 - 1e-8));
}

#[test]
fn delta_of_the_blowup_is_six_sevenths() {
    let bl = catalog::blowup_p2_surface();
    let d = stability::delta_anticanonical(&bl, &stability::declared_candidates(&bl), &settings()).unwrap();
    assert_eq!(d.witness.name, "ord_E");
    assert!((d.value - 6.0 / 7.0).abs() < 1e-8, "{}", d.value);
}
