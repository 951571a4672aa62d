//! Bundled models: P², the degree-8 del Pezzo Bl_p P², P¹×P¹ and the
//! Hirzebruch surface F₁, each as a surface lattice and as a toric fan.
//!
//! Surface bases: P² `(H)`; Bl_p P² `(H, E)`; P¹×P¹ `(F1, F2)`;
//! F₁ `(f, s)` with `f` a fiber and `s` the (-1)-section.

use std::sync::Arc;

use crate::geometry::{DivisorClass, GeometryModel};
use crate::rational::{int, Rational};
use crate::surface::SurfaceModel;
use crate::toric::ToricModel;

fn q(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
}

fn v(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| int(x)).collect()
}

pub fn blowup_p2_surface() -> SurfaceModel {
    SurfaceModel::new(
        "Bl_pP2",
        q(&[&[1, 0], &[0, -1]]),
        vec![v(&[0, 1])],
        vec![v(&[1, -1]), v(&[1, 0])],
        v(&[-3, 1]),
    )
    .and_then(|m| m.with_curve_valuation("ord_E", &[0, 1], None, int(1)))
    .and_then(|m| m.with_curve_valuation("ord_fiber", &[1, -1], None, int(1)))
    .and_then(|m| m.with_curve_valuation("line", &[1, 0], None, int(1)))
    .expect("bundled Bl_p P2 is valid")
}

/// P² with its blowup at a point declared as a birational model, so the
/// exceptional valuation (log discrepancy 2 over P²) is available.
pub fn p2_surface() -> SurfaceModel {
    SurfaceModel::new("P2", q(&[&[1]]), vec![], vec![v(&[1])], v(&[-3]))
        .and_then(|m| m.with_blowup("Bl_p", Arc::new(blowup_p2_surface()), q(&[&[1], &[0]])))
        .and_then(|m| m.with_curve_valuation("line", &[1], None, int(1)))
        .and_then(|m| m.with_curve_valuation("exc", &[0, 1], Some("Bl_p"), int(2)))
        .expect("bundled P2 is valid")
}

fn blowup_p1xp1_surface() -> SurfaceModel {
    SurfaceModel::new(
        "Bl_pP1xP1",
        q(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, -1]]),
        vec![v(&[0, 0, 1]), v(&[1, 0, -1]), v(&[0, 1, -1])],
        vec![v(&[1, 0, 0]), v(&[0, 1, 0])],
        v(&[-2, -2, 1]),
    )
    .expect("bundled Bl_p P1xP1 is valid")
}

pub fn p1xp1_surface() -> SurfaceModel {
    SurfaceModel::new(
        "P1xP1",
        q(&[&[0, 1], &[1, 0]]),
        vec![],
        vec![v(&[1, 0]), v(&[0, 1])],
        v(&[-2, -2]),
    )
    .and_then(|m| m.with_blowup("Bl_p", Arc::new(blowup_p1xp1_surface()), q(&[&[1, 0], &[0, 1], &[0, 0]])))
    .and_then(|m| m.with_curve_valuation("fiber1", &[1, 0], None, int(1)))
    .and_then(|m| m.with_curve_valuation("fiber2", &[0, 1], None, int(1)))
    .and_then(|m| m.with_curve_valuation("exc", &[0, 0, 1], Some("Bl_p"), int(2)))
    .expect("bundled P1xP1 is valid")
}

pub fn f1_surface() -> SurfaceModel {
    SurfaceModel::new(
        "F1",
        q(&[&[0, 1], &[1, -1]]),
        vec![v(&[0, 1])],
        vec![v(&[1, 0]), v(&[1, 1])],
        v(&[-3, -2]),
    )
    .and_then(|m| m.with_curve_valuation("ord_s", &[0, 1], None, int(1)))
    .and_then(|m| m.with_curve_valuation("fiber", &[1, 0], None, int(1)))
    .and_then(|m| m.with_curve_valuation("section", &[1, 1], None, int(1)))
    .expect("bundled F1 is valid")
}

pub fn p2_toric() -> ToricModel {
    ToricModel::new("P2_toric", vec![vec![1, 0], vec![0, 1], vec![-1, -1]], None)
        .and_then(|m| m.with_monomial_valuation("e1", &[1, 0]))
        .and_then(|m| m.with_monomial_valuation("e2", &[0, 1]))
        .and_then(|m| m.with_monomial_valuation("e3", &[-1, -1]))
        .and_then(|m| m.with_monomial_valuation("exc", &[1, 1]))
        .expect("bundled toric P2 is valid")
}

pub fn blowup_p2_toric() -> ToricModel {
    ToricModel::new("Bl_pP2_toric", vec![vec![1, 0], vec![1, 1], vec![0, 1], vec![-1, -1]], None)
        .and_then(|m| m.with_monomial_valuation("e1", &[1, 0]))
        .and_then(|m| m.with_monomial_valuation("ord_E", &[1, 1]))
        .and_then(|m| m.with_monomial_valuation("e2", &[0, 1]))
        .and_then(|m| m.with_monomial_valuation("e3", &[-1, -1]))
        .expect("bundled toric Bl_p P2 is valid")
}

pub fn p1xp1_toric() -> ToricModel {
    ToricModel::new("P1xP1_toric", vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]], None)
        .and_then(|m| m.with_monomial_valuation("e1", &[1, 0]))
        .and_then(|m| m.with_monomial_valuation("e2", &[0, 1]))
        .and_then(|m| m.with_monomial_valuation("e3", &[-1, 0]))
        .and_then(|m| m.with_monomial_valuation("e4", &[0, -1]))
        .and_then(|m| m.with_monomial_valuation("exc", &[1, 1]))
        .expect("bundled toric P1xP1 is valid")
}

pub fn f1_toric() -> ToricModel {
    ToricModel::new("F1_toric", vec![vec![1, 0], vec![0, 1], vec![-1, 1], vec![0, -1]], None)
        .and_then(|m| m.with_monomial_valuation("fiber", &[1, 0]))
        .and_then(|m| m.with_monomial_valuation("ord_s", &[0, 1]))
        .and_then(|m| m.with_monomial_valuation("fiber2", &[-1, 1]))
        .and_then(|m| m.with_monomial_valuation("section", &[0, -1]))
        .expect("bundled toric F1 is valid")
}

/// Anticanonical class of any bundled model.
pub fn anticanonical(model: &dyn GeometryModel) -> DivisorClass {
    model.canonical_class().scaled(&int(-1))
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 8] = [
    "P2", "Bl_pP2", "P1xP1", "F1", "P2_toric", "Bl_pP2_toric", "P1xP1_toric", "F1_toric",
];

pub fn by_name(name: &str) -> Option<Arc<dyn GeometryModel>> {
    Some(match name {
        "P2" => Arc::new(p2_surface()),
        "Bl_pP2" => Arc::new(blowup_p2_surface()),
        "P1xP1" => Arc::new(p1xp1_surface()),
        "F1" => Arc::new(f1_surface()),
        "P2_toric" => Arc::new(p2_toric()),
        "Bl_pP2_toric" => Arc::new(blowup_p2_toric()),
        "P1xP1_toric" => Arc::new(p1xp1_toric()),
        "F1_toric" => Arc::new(f1_toric()),
        _ => return None,
    })
}
