//! Divisorial filtrations of section rings.
//!
//! A filtration is given by valuations `E_i` with shifts `t_i`; its volume is
//! the expected vanishing order
//!
//! ```text
//! S(t) = t_0 + vol(L)^-1 * integral_{t_0}^{inf} vol(L - sum_i max(lambda - t_i, 0) E_i) d lambda
//! ```
//!
//! with `t_0 = min t_i`. The trivial valuation contributes no twist; it cuts
//! the integrand to zero for `lambda > t_triv`.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::{DivisorClass, GeometryModel, OrderModel, Tolerances, Twist, Valuation};
use crate::quadrature::{self, AdaptiveSettings};
use crate::rational::{self, Rational};
use crate::toric::ToricModel;

#[derive(Clone, Debug, PartialEq)]
pub struct FiltrationSpec {
    support: Vec<Valuation>,
    shifts: Vec<f64>,
}

impl FiltrationSpec {
    pub fn new(support: Vec<Valuation>, shifts: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidFiltration("empty support".into()));
        }
        if support.len() != shifts.len() {
            return Err(Error::InvalidFiltration(format!(
                "{} valuations but {} shifts",
                support.len(),
                shifts.len()
            )));
        }
        if let Some(t) = shifts.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidFiltration(format!("non-finite shift {t}")));
        }
        let mut seen = HashSet::new();
        for v in &support {
            if !seen.insert(v.name.as_str()) {
                return Err(Error::InvalidFiltration(format!("valuation `{}` repeated", v.name)));
            }
        }
        Ok(Self { support, shifts })
    }

    /// The valuative filtration of a single valuation (`t = 0`).
    pub fn single(v: Valuation) -> Self {
        Self {
            support: vec![v],
            shifts: vec![0.0],
        }
    }

    pub fn support(&self) -> &[Valuation] {
        &self.support
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn lambda_min(&self) -> f64 {
        self.shifts.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            support: self.support.clone(),
            shifts: self.shifts.iter().map(|t| t + c).collect(),
        }
    }

    pub fn with_shifts(&self, shifts: Vec<f64>) -> Result<Self> {
        Self::new(self.support.clone(), shifts)
    }

    /// Restriction to a sub-support, keeping the corresponding shifts.
    pub fn restrict(&self, names: &[&str]) -> Result<Self> {
        let mut support = Vec::new();
        let mut shifts = Vec::new();
        for name in names {
            let i = self
                .support
                .iter()
                .position(|v| v.name == *name)
                .ok_or_else(|| Error::InvalidArgument(format!("`{name}` is not in the support")))?;
            support.push(self.support[i].clone());
            shifts.push(self.shifts[i]);
        }
        Self::new(support, shifts)
    }
}

/// `t -> S_{L,Sigma}(t)` for a fixed model, class and support, with the
/// pseudoeffective thresholds precomputed.
pub struct ExpectedOrder<'a> {
    model: &'a dyn GeometryModel,
    l: DivisorClass,
    support: Vec<Valuation>,
    thresholds: Vec<f64>,
    volume: f64,
    tol: Tolerances,
}

impl<'a> ExpectedOrder<'a> {
    pub fn new(model: &'a dyn GeometryModel, l: &DivisorClass, support: &[Valuation], tol: Tolerances) -> Result<Self> {
        model.check_class(l)?;
        let vol = model.volume(l)?;
        if vol <= Rational::from_integer(0.into()) {
            return Err(Error::NotBig);
        }
        let mut thresholds = Vec::with_capacity(support.len());
        for v in support {
            model.check_valuation(v)?;
            thresholds.push(if v.is_trivial() {
                0.0
            } else {
                model.gamma_threshold(l, v, tol.threshold)?.upper()
            });
        }
        Ok(Self {
            model,
            l: l.clone(),
            support: support.to_vec(),
            thresholds,
            volume: rational::to_f64(&vol),
            tol,
        })
    }

    pub fn for_spec(model: &'a dyn GeometryModel, l: &DivisorClass, spec: &FiltrationSpec, tol: Tolerances) -> Result<Self> {
        Self::new(model, l, spec.support(), tol)
    }

    pub fn model(&self) -> &'a dyn GeometryModel {
        self.model
    }

    pub fn line_bundle(&self) -> &DivisorClass {
        &self.l
    }

    pub fn support(&self) -> &[Valuation] {
        &self.support
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// `(lambda_min, lambda_max)`: below the first the filtration is
    /// everything, above the second it is zero.
    pub fn lambda_bounds(&self, t: &[f64]) -> (f64, f64) {
        let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = t
            .iter()
            .zip(&self.thresholds)
            .map(|(ti, g)| ti + g)
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    fn check_len(&self, t: &[f64]) -> Result<()> {
        if t.len() != self.support.len() {
            return Err(Error::InvalidFiltration(format!(
                "{} shifts for a support of size {}",
                t.len(),
                self.support.len()
            )));
        }
        Ok(())
    }

    fn twists(&self, t: &[f64], lambda: f64) -> Option<Vec<Twist<'_>>> {
        let mut out = Vec::with_capacity(t.len());
        for (v, ti) in self.support.iter().zip(t) {
            if v.is_trivial() {
                if lambda > *ti {
                    return None;
                }
            } else if lambda > *ti {
                out.push((v, lambda - ti));
            }
        }
        Some(out)
    }

    /// `vol(R_{>= lambda})`: the integrand of the expected order.
    pub fn integrand(&self, t: &[f64], lambda: f64) -> Result<f64> {
        match self.twists(t, lambda) {
            None => Ok(0.0),
            Some(tw) if tw.is_empty() => Ok(self.volume),
            Some(tw) => self.model.filtration_volume(&self.l, &tw),
        }
    }

    fn breakpoints(&self, t: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
        let mut pts: Vec<f64> = t.to_vec();
        pts.extend(t.iter().zip(&self.thresholds).map(|(a, b)| a + b));
        let shifts: Vec<Twist<'_>> = self.support.iter().zip(t.iter().copied()).filter(|(v, _)| !v.is_trivial()).collect();
        if !shifts.is_empty() {
            pts.extend(self.model.filtration_kinks(&self.l, &shifts, lo, hi)?);
        }
        Ok(pts)
    }

    fn settings(&self) -> AdaptiveSettings {
        AdaptiveSettings {
            tolerance: self.tol.quadrature * self.volume,
            ..AdaptiveSettings::default()
        }
    }

    /// `S_{L,Sigma}(t)`.
    pub fn eval(&self, t: &[f64]) -> Result<f64> {
        self.check_len(t)?;
        let (lo, hi) = self.lambda_bounds(t);
        if hi <= lo {
            return Ok(lo);
        }
        let pts = self.breakpoints(t, lo, hi)?;
        let integral = quadrature::integrate(|lam| self.integrand(t, lam), lo, hi, &pts, self.settings())?;
        Ok(lo + integral / self.volume)
    }

    /// Derivative of `S_L(t)` in the direction `h` of the class `L`, at
    /// fixed `t`:
    /// `vol(L)^-1 * int d_h vol(L_lambda) - d_h vol(L) / vol(L)^2 * int vol(L_lambda)`.
    pub fn class_derivative(&self, t: &[f64], h: &DivisorClass) -> Result<f64> {
        self.check_len(t)?;
        let (lo, hi) = self.lambda_bounds(t);
        if hi <= lo {
            return Ok(0.0);
        }
        let dv = self.model.volume_derivative(&self.l, h)?;
        let pts = self.breakpoints(t, lo, hi)?;
        let settings = self.settings();
        let integral = quadrature::integrate(|lam| self.integrand(t, lam), lo, hi, &pts, settings)?;
        let d_integral = quadrature::integrate(
            |lam| match self.twists(t, lam) {
                None => Ok(0.0),
                Some(tw) if tw.is_empty() => Ok(dv),
                Some(tw) => self.model.filtration_volume_derivative(&self.l, &tw, h),
            },
            lo,
            hi,
            &pts,
            AdaptiveSettings {
                tolerance: settings.tolerance * (1.0 + dv.abs() / self.volume),
                ..settings
            },
        )?;
        Ok(d_integral / self.volume - dv * integral / (self.volume * self.volume))
    }
}

/// `S_{L}` of a filtration spec.
pub fn expected_order_s(model: &dyn GeometryModel, l: &DivisorClass, spec: &FiltrationSpec, tol: Tolerances) -> Result<f64> {
    ExpectedOrder::for_spec(model, l, spec, tol)?.eval(spec.shifts())
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpingProfile {
    pub level: u32,
    /// Jumping values, nonincreasing, one per basis section.
    pub jumps: Vec<f64>,
    /// `(dim R_k)^-1 * sum of jumps`.
    pub volume: f64,
}

impl JumpingProfile {
    /// `k^-1 vol(F_k)`, which tends to the filtration volume.
    pub fn normalized_volume(&self) -> f64 {
        self.volume / self.level as f64
    }

    pub fn dimension(&self) -> usize {
        self.jumps.len()
    }
}

/// Per-monomial jumping value `min_i (ord_i(m) + k t_i)` on `H^0(kL)`.
fn monomial_jumps(model: &ToricModel, l: &DivisorClass, spec: &FiltrationSpec, k: u32, basis: &[Vec<i64>]) -> Result<Vec<f64>> {
    let mut orders: Vec<(Option<(Vec<i64>, Rational)>, f64)> = Vec::new();
    for (v, t) in spec.support().iter().zip(spec.shifts()) {
        match &v.order {
            OrderModel::Trivial => orders.push((None, *t)),
            OrderModel::Monomial { weights } => {
                let anchor = model.order_anchor(l, weights)?.ok_or(Error::NotBig)?;
                orders.push((Some((weights.clone(), anchor)), *t));
            }
            OrderModel::Curve { .. } => return Err(Error::UnsupportedValuation(v.name.clone())),
        }
    }
    let kf = k as f64;
    Ok(basis
        .iter()
        .map(|m| {
            orders
                .iter()
                .map(|(o, t)| match o {
                    None => kf * t,
                    Some((w, anchor)) => rational::to_f64(&model.monomial_order(w, anchor, k, m)) + kf * t,
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

/// Jumping values of the filtration on `H^0(kL)` from the monomial basis,
/// which is adapted to every monomial filtration at once.
pub fn filtration_volume_finite_k(model: &ToricModel, l: &DivisorClass, spec: &FiltrationSpec, k: u32) -> Result<JumpingProfile> {
    for v in spec.support() {
        model.check_valuation(v)?;
    }
    let basis = model.section_basis(l, k)?;
    if basis.is_empty() {
        return Err(Error::NotBig);
    }
    let mut jumps = monomial_jumps(model, l, spec, k, &basis)?;
    jumps.sort_by(|a, b| b.total_cmp(a));
    let volume = jumps.iter().sum::<f64>() / jumps.len() as f64;
    Ok(JumpingProfile { level: k, jumps, volume })
}

/// `max_m |lambda_a(m) - lambda_b(m)|` over the monomial basis of `H^0(kL)`.
pub fn d_infinity(model: &ToricModel, l: &DivisorClass, a: &FiltrationSpec, b: &FiltrationSpec, k: u32) -> Result<f64> {
    for v in a.support().iter().chain(b.support()) {
        model.check_valuation(v)?;
    }
    let basis = model.section_basis(l, k)?;
    let ja = monomial_jumps(model, l, a, k, &basis)?;
    let jb = monomial_jumps(model, l, b, k, &basis)?;
    Ok(ja.iter().zip(&jb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestrictionWitness {
    pub holds: bool,
    /// Volume of the filtration on the full support.
    pub superset_volume: f64,
    /// Volume of the filtration restricted to the sub-support.
    pub subset_volume: f64,
}

/// Checks that dropping valuations can only enlarge the filtration volume.
pub fn restriction_inequality_check(
    model: &dyn GeometryModel,
    l: &DivisorClass,
    superset: &FiltrationSpec,
    subset_support: &[&str],
    tol: Tolerances,
) -> Result<RestrictionWitness> {
    let names: HashSet<&str> = superset.support().iter().map(|v| v.name.as_str()).collect();
    if let Some(missing) = subset_support.iter().find(|n| !names.contains(*n)) {
        return Err(Error::InvalidArgument(format!("`{missing}` is not in the superset support")));
    }
    let sub = superset.restrict(subset_support)?;
    let superset_volume = expected_order_s(model, l, superset, tol)?;
    let subset_volume = expected_order_s(model, l, &sub, tol)?;
    Ok(RestrictionWitness {
        holds: superset_volume <= subset_volume + tol.quadrature,
        superset_volume,
        subset_volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn expected_orders_match_closed_forms() {
        let p2 = catalog::p2_surface();
        let line = FiltrationSpec::single(p2.valuation("line").unwrap());
        let s = expected_order_s(&p2, &p2.class(&[3]), &line, tol()).unwrap();
        assert!((s - 1.0).abs() < 1e-12);

        let bl = catalog::blowup_p2_surface();
        let e = FiltrationSpec::single(bl.valuation("ord_E").unwrap());
        let s = expected_order_s(&bl, &bl.class(&[3, -1]), &e, tol()).unwrap();
        assert!((s - 7.0 / 6.0).abs() < 1e-12);

        let triv = FiltrationSpec::new(vec![Valuation::trivial()], vec![0.75]).unwrap();
        assert_eq!(expected_order_s(&p2, &p2.class(&[3]), &triv, tol()).unwrap(), 0.75);
    }

    #[test]
    fn exceptional_valuation_over_p2() {
        let p2 = catalog::p2_surface();
        let exc = FiltrationSpec::single(p2.valuation("exc").unwrap());
        // (1/9) int_0^3 (9 - l^2) dl = 2
        let s = expected_order_s(&p2, &p2.class(&[3]), &exc, tol()).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn backends_agree_on_toric_surfaces() {
        let pairs = [
            (catalog::p2_surface(), catalog::p2_toric(), "line", "e1"),
            (catalog::blowup_p2_surface(), catalog::blowup_p2_toric(), "ord_E", "ord_E"),
            (catalog::f1_surface(), catalog::f1_toric(), "fiber", "fiber"),
            (catalog::f1_surface(), catalog::f1_toric(), "section", "section"),
        ];
        for (s, t, a, b) in pairs {
            let ls = catalog::anticanonical(&s);
            let lt = catalog::anticanonical(&t);
            let x = expected_order_s(&s, &ls, &FiltrationSpec::single(s.valuation(a).unwrap()), tol()).unwrap();
            let y = expected_order_s(&t, &lt, &FiltrationSpec::single(t.valuation(b).unwrap()), tol()).unwrap();
            assert!((x - y).abs() < 1e-10, "{a}: {x} vs {y}");
        }
    }

    #[test]
    fn translation_equivariance_with_trivial() {
        let bl = catalog::blowup_p2_surface();
        let l = catalog::anticanonical(&bl);
        let spec = FiltrationSpec::new(
            vec![Valuation::trivial(), bl.valuation("ord_E").unwrap(), bl.valuation("ord_fiber").unwrap()],
            vec![0.7, 0.0, 0.3],
        )
        .unwrap();
        let s0 = expected_order_s(&bl, &l, &spec, tol()).unwrap();
        let s1 = expected_order_s(&bl, &l, &spec.shifted(2.5), tol()).unwrap();
        assert!((s1 - s0 - 2.5).abs() < 1e-9);
    }

    #[test]
    fn jumping_profiles() {
        let p2 = catalog::p2_toric();
        let l = p2.class(&[0, 0, 3]);
        let triv = FiltrationSpec::single(Valuation::trivial());
        let p = filtration_volume_finite_k(&p2, &l, &triv, 1).unwrap();
        assert!(p.jumps.iter().all(|&x| x == 0.0));
        assert_eq!(p.volume, 0.0);

        let e1 = FiltrationSpec::single(p2.valuation("e1").unwrap());
        let p = filtration_volume_finite_k(&p2, &l, &e1, 1).unwrap();
        assert_eq!(p.jumps, vec![3.0, 2.0, 2.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.volume, 1.0);

        let p = filtration_volume_finite_k(&p2, &l, &e1, 50).unwrap();
        assert!((p.normalized_volume() - 1.0).abs() <= 0.05);
        assert_eq!(p.dimension(), 151 * 152 / 2);
    }

    #[test]
    fn d_infinity_examples() {
        let p2 = catalog::p2_toric();
        let l = p2.class(&[0, 0, 3]);
        let e1 = p2.valuation("e1").unwrap();
        let a = FiltrationSpec::single(e1.clone());
        assert_eq!(d_infinity(&p2, &l, &a, &a, 3).unwrap(), 0.0);
        let b = FiltrationSpec::new(vec![e1], vec![1.0]).unwrap();
        assert_eq!(d_infinity(&p2, &l, &a, &b, 3).unwrap(), 3.0);
        let two = FiltrationSpec::new(vec![p2.valuation("e1").unwrap(), p2.valuation("e2").unwrap()], vec![0.0, 0.5]).unwrap();
        assert!((d_infinity(&p2, &l, &two, &two.shifted(2.0), 1).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn restriction_examples() {
        let p2 = catalog::p2_toric();
        let l = p2.class(&[0, 0, 3]);
        let e1 = p2.valuation("e1").unwrap();
        let e2 = p2.valuation("e2").unwrap();
        let t = FiltrationSpec::new(vec![e1.clone(), e2.clone()], vec![0.0, 0.0]).unwrap();
        let w = restriction_inequality_check(&p2, &l, &t, &["e1"], tol()).unwrap();
        assert!(w.holds && w.superset_volume < w.subset_volume);

        let w = restriction_inequality_check(&p2, &l, &t, &["e1", "e2"], tol()).unwrap();
        assert!(w.holds && (w.superset_volume - w.subset_volume).abs() < 1e-12);

        let far = FiltrationSpec::new(vec![e1, e2], vec![0.0, 30.0]).unwrap();
        let w = restriction_inequality_check(&p2, &l, &far, &["e1"], tol()).unwrap();
        assert!(w.holds && (w.superset_volume - w.subset_volume).abs() < 1e-12);

        assert!(restriction_inequality_check(&p2, &l, &far, &["e3"], tol()).is_err());
    }

    #[test]
    fn class_derivative_matches_finite_difference() {
        let bl = catalog::blowup_p2_surface();
        let l = catalog::anticanonical(&bl);
        let support = vec![bl.valuation("ord_E").unwrap(), bl.valuation("ord_fiber").unwrap()];
        let t = [0.0, 0.4];
        let h = bl.class(&[1, -1]);
        let s = ExpectedOrder::new(&bl, &l, &support, tol()).unwrap();
        let analytic = s.class_derivative(&t, &h).unwrap();
        let eps = rational::ratio(1, 10_000);
        let up = ExpectedOrder::new(&bl, &l.add_scaled(&eps, &h).unwrap(), &support, tol()).unwrap().eval(&t).unwrap();
        let down = ExpectedOrder::new(&bl, &l.add_scaled(&-eps.clone(), &h).unwrap(), &support, tol()).unwrap().eval(&t).unwrap();
        let fd = (up - down) / 2e-4;
        assert!((analytic - fd).abs() < 1e-6, "{analytic} vs {fd}");
    }

    #[test]
    fn rejects_bad_specs() {
        let v = Valuation::trivial();
        assert!(FiltrationSpec::new(vec![v.clone(), v.clone()], vec![0.0, 1.0]).is_err());
        assert!(FiltrationSpec::new(vec![v.clone()], vec![]).is_err());
        assert!(FiltrationSpec::new(vec![v], vec![f64::NAN]).is_err());
        let p2 = catalog::p2_surface();
        let neg = p2.class(&[-1]);
        assert_eq!(
            expected_order_s(&p2, &neg, &FiltrationSpec::single(p2.valuation("line").unwrap()), tol()),
            Err(Error::NotBig)
        );
    }
}
