//! Smooth projective surfaces given by a declared Néron–Severi lattice.
//!
//! Volumes and positive products are computed from the Zariski decomposition,
//! found by growing the negative part's support one batch of curves at a time
//! and re-solving the Gram system. The declared negative-curve list is trusted
//! to be complete; a wrong list gives wrong volumes.

use std::sync::Arc;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{DivisorClass, GeometryModel, OrderModel, Threshold, Twist, Valuation};
use crate::linalg::{self, Matrix, Scalar};
use crate::rational::{self, Rational};

/// A birational model `Y -> X` on which exceptional valuations are realized.
#[derive(Clone, Debug)]
pub struct Blowup {
    pub name: String,
    pub model: Arc<SurfaceModel>,
    /// `pullback[i][j]` is the coefficient of the `i`-th basis class of `Y`
    /// in the pullback of the `j`-th basis class of `X`.
    pullback: Matrix<Rational>,
}

impl Blowup {
    pub fn pull_back(&self, d: &DivisorClass) -> DivisorClass {
        let coeffs = linalg::mat_vec(&self.pullback, d.coeffs());
        DivisorClass::new(self.model.name_arc(), coeffs)
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceModel {
    name: Arc<str>,
    gram: Matrix<Rational>,
    gram_f64: Matrix<f64>,
    negative_curves: Vec<DivisorClass>,
    sample_curves: Vec<DivisorClass>,
    canonical: DivisorClass,
    valuations: Vec<Valuation>,
    blowups: Vec<Blowup>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZariskiDecomposition {
    pub positive: DivisorClass,
    /// `(index into the model's negative curves, class, coefficient)`.
    pub negative: Vec<(usize, DivisorClass, Rational)>,
}

impl ZariskiDecomposition {
    pub fn negative_part(&self) -> DivisorClass {
        let mut acc = DivisorClass::zero(self.positive.basis_arc().clone(), self.positive.rank());
        for (_, c, a) in &self.negative {
            acc = acc.add_scaled(a, c).expect("same basis");
        }
        acc
    }
}

/// Raw decomposition over any scalar: `(positive part, [(curve index, coefficient)])`.
type RawZariski<S> = (Vec<S>, Vec<(usize, S)>);

fn pair<S: Scalar>(gram: &Matrix<S>, a: &[S], b: &[S]) -> S {
    linalg::dot(a, &linalg::mat_vec(gram, b))
}

fn zariski_raw<S: Scalar>(
    gram: &Matrix<S>,
    negative: &[Vec<S>],
    samples: &[Vec<S>],
    d: &[S],
) -> Result<RawZariski<S>> {
    let mut support: Vec<usize> = Vec::new();
    loop {
        let coeffs: Vec<S> = if support.is_empty() {
            Vec::new()
        } else {
            let g: Matrix<S> = support
                .iter()
                .map(|&i| {
                    support
                        .iter()
                        .map(|&j| pair(gram, &negative[i], &negative[j]))
                        .collect()
                })
                .collect();
            if !linalg::is_negative_definite(&g) {
                return Err(Error::NotNegativeDefinite(support.clone()));
            }
            let rhs: Vec<S> = support.iter().map(|&i| pair(gram, d, &negative[i])).collect();
            linalg::solve(&g, &rhs).ok_or_else(|| Error::NotNegativeDefinite(support.clone()))?
        };
        if let Some(pos) = coeffs.iter().position(|x| x.is_neg()) {
            return Err(Error::NotPseudoeffective(format!(
                "curve #{} forced to a negative coefficient",
                support[pos]
            )));
        }
        let mut p = d.to_vec();
        for (x, &i) in coeffs.iter().zip(&support) {
            for (pk, ck) in p.iter_mut().zip(&negative[i]) {
                *pk = pk.clone() - x.clone() * ck.clone();
            }
        }
        let entering: Vec<usize> = (0..negative.len())
            .filter(|i| !support.contains(i) && pair(gram, &p, &negative[*i]).is_neg())
            .collect();
        if entering.is_empty() {
            for (k, c) in samples.iter().enumerate() {
                if pair(gram, &p, c).is_neg() {
                    return Err(Error::NotPseudoeffective(format!(
                        "positive part meets sample curve #{k} negatively"
                    )));
                }
            }
            if pair(gram, &p, &p).is_neg() {
                return Err(Error::NotPseudoeffective("positive part has negative square".into()));
            }
            let neg = support
                .into_iter()
                .zip(coeffs)
                .filter(|(_, x)| !x.negligible())
                .collect();
            return Ok((p, neg));
        }
        support.extend(entering);
        support.sort_unstable();
    }
}

impl SurfaceModel {
    /// Validates the lattice (signature `(1, rank-1)`), curve lists and
    /// canonical class.
    pub fn new(
        name: &str,
        gram: Matrix<Rational>,
        negative_curves: Vec<Vec<Rational>>,
        sample_curves: Vec<Vec<Rational>>,
        canonical: Vec<Rational>,
    ) -> Result<Self> {
        let rank = gram.len();
        if rank == 0 || gram.iter().any(|r| r.len() != rank) {
            return Err(Error::InvalidModel(format!("`{name}`: intersection matrix must be square and nonempty")));
        }
        for i in 0..rank {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidModel(format!("`{name}`: intersection matrix is not symmetric")));
                }
            }
        }
        let (pos, neg, zero) = linalg::inertia(&gram);
        if pos != 1 || neg != rank - 1 || zero != 0 {
            return Err(Error::InvalidModel(format!(
                "`{name}`: intersection form has signature ({pos}, {neg}) with {zero} null directions, expected (1, {})",
                rank - 1
            )));
        }
        let name: Arc<str> = name.into();
        let mk = |v: Vec<Rational>, what: &str| -> Result<DivisorClass> {
            if v.len() != rank {
                return Err(Error::InvalidModel(format!("`{name}`: {what} has rank {} not {rank}", v.len())));
            }
            Ok(DivisorClass::new(name.clone(), v))
        };
        let negative_curves = negative_curves
            .into_iter()
            .map(|c| mk(c, "negative curve"))
            .collect::<Result<Vec<_>>>()?;
        let sample_curves = sample_curves
            .into_iter()
            .map(|c| mk(c, "sample curve"))
            .collect::<Result<Vec<_>>>()?;
        let canonical = mk(canonical, "canonical class")?;
        let gram_f64 = gram
            .iter()
            .map(|r| r.iter().map(rational::to_f64).collect())
            .collect();
        let model = Self {
            name,
            gram,
            gram_f64,
            negative_curves,
            sample_curves,
            canonical,
            valuations: Vec::new(),
            blowups: Vec::new(),
        };
        for (k, c) in model.negative_curves.iter().enumerate() {
            if !model.intersect(c, c)?.is_negative() {
                return Err(Error::InvalidModel(format!(
                    "`{}`: negative curve #{k} has nonnegative self-intersection",
                    model.name
                )));
            }
        }
        Ok(model)
    }

    pub fn with_blowup(mut self, name: &str, model: Arc<SurfaceModel>, pullback: Matrix<Rational>) -> Result<Self> {
        if pullback.len() != model.rank() || pullback.iter().any(|r| r.len() != self.rank()) {
            return Err(Error::InvalidModel(format!(
                "pullback to `{name}` must be a {}x{} matrix",
                model.rank(),
                self.rank()
            )));
        }
        // pullback preserves intersection numbers
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                let ci: Vec<Rational> = pullback.iter().map(|r| r[i].clone()).collect();
                let cj: Vec<Rational> = pullback.iter().map(|r| r[j].clone()).collect();
                if pair(&model.gram, &ci, &cj) != self.gram[i][j] {
                    return Err(Error::InvalidModel(format!(
                        "pullback to `{name}` does not preserve intersection numbers"
                    )));
                }
            }
        }
        if self.blowups.iter().any(|b| b.name == name) {
            return Err(Error::InvalidModel(format!("duplicate birational model `{name}`")));
        }
        self.blowups.push(Blowup {
            name: name.to_string(),
            model,
            pullback,
        });
        Ok(self)
    }

    pub fn with_valuation(mut self, v: Valuation) -> Result<Self> {
        self.check_valuation(&v)?;
        if v.is_trivial() || self.valuations.iter().any(|w| w.name == v.name) {
            return Err(Error::InvalidModel(format!("duplicate or reserved valuation name `{}`", v.name)));
        }
        self.valuations.push(v);
        Ok(self)
    }

    /// Declares a curve valuation on this model or on one of its blowups.
    pub fn with_curve_valuation(
        self,
        name: &str,
        class: &[i64],
        realized_on: Option<&str>,
        log_discrepancy: Rational,
    ) -> Result<Self> {
        let basis = match realized_on {
            None => self.name.clone(),
            Some(b) => self.blowup(b)?.model.name_arc(),
        };
        let v = Valuation::curve(
            name,
            DivisorClass::from_ints(basis, class),
            realized_on.map(str::to_string),
            log_discrepancy,
        )?;
        self.with_valuation(v)
    }

    pub(crate) fn name_arc(&self) -> Arc<str> {
        self.name.clone()
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn intersection_matrix(&self) -> &Matrix<Rational> {
        &self.gram
    }

    pub fn negative_curves(&self) -> &[DivisorClass] {
        &self.negative_curves
    }

    pub fn sample_curves(&self) -> &[DivisorClass] {
        &self.sample_curves
    }

    pub fn blowups(&self) -> &[Blowup] {
        &self.blowups
    }

    pub fn blowup(&self, name: &str) -> Result<&Blowup> {
        self.blowups
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::InvalidModel(format!("unknown birational model `{name}`")))
    }

    pub fn class(&self, coeffs: &[i64]) -> DivisorClass {
        DivisorClass::from_ints(self.name.clone(), coeffs)
    }

    pub fn intersect(&self, a: &DivisorClass, b: &DivisorClass) -> Result<Rational> {
        self.check_class(a)?;
        self.check_class(b)?;
        Ok(pair(&self.gram, a.coeffs(), b.coeffs()))
    }

    fn curve_lists<S: Scalar>(&self) -> (Vec<Vec<S>>, Vec<Vec<S>>) {
        let conv = |c: &DivisorClass| c.coeffs().iter().map(S::from_rational).collect::<Vec<S>>();
        (
            self.negative_curves.iter().map(conv).collect(),
            self.sample_curves.iter().map(conv).collect(),
        )
    }

    /// Exact Zariski decomposition `D = P + sum a_i C_i`.
    pub fn zariski(&self, d: &DivisorClass) -> Result<ZariskiDecomposition> {
        self.check_class(d)?;
        let (neg, samples) = self.curve_lists::<Rational>();
        let (p, support) = zariski_raw(&self.gram, &neg, &samples, d.coeffs())?;
        Ok(ZariskiDecomposition {
            positive: DivisorClass::new(self.name.clone(), p),
            negative: support
                .into_iter()
                .map(|(i, a)| (i, self.negative_curves[i].clone(), a))
                .collect(),
        })
    }

    fn zariski_f64(&self, d: &[f64]) -> Result<RawZariski<f64>> {
        let (neg, samples) = self.curve_lists::<f64>();
        zariski_raw(&self.gram_f64, &neg, &samples, d)
    }

    fn volume_f64(&self, d: &[f64]) -> f64 {
        match self.zariski_f64(d) {
            Ok((p, _)) => pair(&self.gram_f64, &p, &p).max(0.0),
            Err(_) => 0.0,
        }
    }

    /// `P . H` for `P` the positive part of a big class `D`.
    pub fn positive_product_against(&self, d: &DivisorClass, h: &DivisorClass) -> Result<Rational> {
        self.check_class(h)?;
        let z = self.zariski(d).map_err(|_| Error::NotBig)?;
        if !self.intersect(&z.positive, &z.positive)?.is_positive() {
            return Err(Error::NotBig);
        }
        self.intersect(&z.positive, h)
    }

    /// Resolves the model realizing every curve valuation among `vals`, and
    /// the pullback of `l` there.
    fn working_model<'a, 'v>(
        &'a self,
        l: &DivisorClass,
        vals: impl Iterator<Item = &'v Valuation>,
    ) -> Result<(&'a SurfaceModel, DivisorClass)> {
        let mut realized: Option<Option<&str>> = None;
        for v in vals {
            match &v.order {
                OrderModel::Trivial => {}
                OrderModel::Curve { model, .. } => {
                    let m = model.as_deref();
                    match realized {
                        None => realized = Some(m),
                        Some(prev) if prev == m => {}
                        Some(prev) => {
                            return Err(Error::IncompatibleModels(format!(
                                "`{}` lives on {:?}, others on {:?}",
                                v.name,
                                m.unwrap_or(&self.name),
                                prev.unwrap_or(&self.name)
                            )))
                        }
                    }
                }
                OrderModel::Monomial { .. } => return Err(Error::UnsupportedValuation(v.name.clone())),
            }
        }
        match realized.flatten() {
            None => Ok((self, l.clone())),
            Some(b) => {
                let b = self.blowup(b)?;
                Ok((&b.model, b.pull_back(l)))
            }
        }
    }

    fn center(v: &Valuation) -> Result<&DivisorClass> {
        match &v.order {
            OrderModel::Curve { class, .. } => Ok(class),
            _ => Err(Error::UnsupportedValuation(v.name.clone())),
        }
    }

    /// `L - sum c_i E_i` on the working model, in floating point.
    fn twisted_f64(&self, l: &DivisorClass, twists: &[Twist<'_>]) -> Result<(&SurfaceModel, Vec<f64>)> {
        let (y, ly) = self.working_model(l, twists.iter().map(|(v, _)| *v))?;
        let mut d = ly.to_f64();
        for (v, c) in twists {
            if v.is_trivial() {
                continue;
            }
            for (dk, ek) in d.iter_mut().zip(Self::center(v)?.to_f64()) {
                *dk -= c * ek;
            }
        }
        Ok((y, d))
    }

    /// Exact threshold when the volume is quadratic on the last chamber
    /// before the boundary and the root is rational.
    fn exact_threshold(&self, l: &DivisorClass, v: &Valuation, tol: f64) -> Result<Threshold> {
        let (lo, hi) = crate::geometry::bisect_bracket(self, l, v, 1e-6)?;
        let (y, ly) = self.working_model(l, std::iter::once(v))?;
        let e = Self::center(v)?;
        let vol = |g: &Rational| -> Result<Rational> { y.volume(&ly.add_scaled(&-g.clone(), e)?) };
        let step = (&hi - &lo) / rational::int(4);
        if step.is_zero() {
            return Ok(Threshold::Exact(lo));
        }
        let xs: Vec<Rational> = (0..4).map(|k| &lo - &step * rational::int(k)).collect();
        let ys: Vec<Rational> = xs.iter().map(&vol).collect::<Result<_>>()?;
        // quadratic through the first three points, checked against the fourth
        let vander: Matrix<Rational> = xs[..3]
            .iter()
            .map(|x| vec![x * x, x.clone(), rational::int(1)])
            .collect();
        if let Some(c) = linalg::solve(&vander, &ys[..3]) {
            let q = |x: &Rational| &c[0] * x * x + &c[1] * x + &c[2];
            if q(&xs[3]) == ys[3] {
                let roots = quadratic_roots(&c[0], &c[1], &c[2]);
                for r in roots {
                    if r >= lo && r <= hi && vol(&r)?.is_zero() && self.twist_is_big(l, v, &lo)? {
                        return Ok(Threshold::Exact(r));
                    }
                }
            }
        }
        crate::geometry::bisect_threshold(self, l, v, tol)
    }
}

fn quadratic_roots(a: &Rational, b: &Rational, c: &Rational) -> Vec<Rational> {
    if a.is_zero() {
        if b.is_zero() {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - rational::int(4) * a * c;
    match rational::sqrt_exact(&disc) {
        Some(s) => {
            let two_a = a * rational::int(2);
            vec![(-b - &s) / &two_a, (-b + s) / two_a]
        }
        None => Vec::new(),
    }
}

impl GeometryModel for SurfaceModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        2
    }

    fn class_rank(&self) -> usize {
        self.rank()
    }

    fn canonical_class(&self) -> &DivisorClass {
        &self.canonical
    }

    fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    fn check_valuation(&self, v: &Valuation) -> Result<()> {
        match &v.order {
            OrderModel::Trivial => Ok(()),
            OrderModel::Monomial { .. } => Err(Error::UnsupportedValuation(v.name.clone())),
            OrderModel::Curve { class, model } => {
                let expected = match model {
                    None => self.name.clone(),
                    Some(b) => self.blowup(b)?.model.name_arc(),
                };
                let rank = match model {
                    None => self.rank(),
                    Some(b) => self.blowup(b)?.model.rank(),
                };
                if class.basis() != &*expected || class.rank() != rank {
                    return Err(Error::BasisMismatch {
                        expected: expected.to_string(),
                        found: class.basis().to_string(),
                    });
                }
                Ok(())
            }
        }
    }

    fn volume(&self, d: &DivisorClass) -> Result<Rational> {
        self.check_class(d)?;
        Ok(match self.zariski(d) {
            Ok(z) => {
                let v = self.intersect(&z.positive, &z.positive)?;
                if v.is_negative() {
                    Rational::zero()
                } else {
                    v
                }
            }
            Err(Error::NotPseudoeffective(_)) => Rational::zero(),
            Err(e) => return Err(e),
        })
    }

    fn volume_derivative(&self, d: &DivisorClass, h: &DivisorClass) -> Result<f64> {
        Ok(2.0 * rational::to_f64(&self.positive_product_against(d, h)?))
    }

    fn twist_is_big(&self, l: &DivisorClass, v: &Valuation, gamma: &Rational) -> Result<bool> {
        let (y, ly) = self.working_model(l, std::iter::once(v))?;
        let d = ly.add_scaled(&-gamma.clone(), Self::center(v)?)?;
        y.is_big(&d)
    }

    fn gamma_threshold(&self, l: &DivisorClass, v: &Valuation, tol: f64) -> Result<Threshold> {
        self.exact_threshold(l, v, tol)
    }

    fn filtration_volume(&self, l: &DivisorClass, twists: &[Twist<'_>]) -> Result<f64> {
        let (y, d) = self.twisted_f64(l, twists)?;
        Ok(y.volume_f64(&d))
    }

    fn filtration_volume_derivative(
        &self,
        l: &DivisorClass,
        twists: &[Twist<'_>],
        h: &DivisorClass,
    ) -> Result<f64> {
        self.check_class(h)?;
        let (y, d) = self.twisted_f64(l, twists)?;
        let (_, hy) = self.working_model(h, twists.iter().map(|(v, _)| *v))?;
        match y.zariski_f64(&d) {
            Ok((p, _)) if pair(&y.gram_f64, &p, &p) > 0.0 => Ok(2.0 * pair(&y.gram_f64, &p, &hy.to_f64())),
            _ => Ok(0.0),
        }
    }

    /// Walks the Zariski chambers crossed by the segment: on a chamber the
    /// positive part is affine in `lambda`, so each exit point solves a
    /// linear (or, for the vanishing of the volume, quadratic) equation.
    fn filtration_kinks(&self, l: &DivisorClass, shifts: &[Twist<'_>], lo: f64, hi: f64) -> Result<Vec<f64>> {
        let (y, ly) = self.working_model(l, shifts.iter().map(|(v, _)| *v))?;
        let base = ly.to_f64();
        let curves: Vec<(f64, Vec<f64>)> = shifts
            .iter()
            .filter(|(v, _)| !v.is_trivial())
            .map(|(v, t)| Ok((*t, Self::center(v)?.to_f64())))
            .collect::<Result<_>>()?;
        let (neg, samples) = y.curve_lists::<f64>();
        let g = &y.gram_f64;

        let mut breaks: Vec<f64> = curves.iter().map(|(t, _)| *t).filter(|t| *t > lo && *t < hi).collect();
        breaks.push(lo);
        breaks.push(hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let mut kinks = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            // D(lambda) = d0 + lambda * dir on this segment
            let mut d0 = base.clone();
            let mut dir = vec![0.0; base.len()];
            for (t, e) in &curves {
                if *t <= a {
                    for k in 0..d0.len() {
                        d0[k] += t * e[k];
                        dir[k] -= e[k];
                    }
                }
            }
            let at = |lam: f64| -> Vec<f64> { d0.iter().zip(&dir).map(|(x, y)| x + lam * y).collect() };
            let mut cur = a;
            for _ in 0..64 {
                if cur >= b {
                    break;
                }
                let probe = cur + ((b - cur) * 1e-6).min(1e-7 * (1.0 + cur.abs())).max(f64::EPSILON * 8.0);
                let Ok((_, support)) = y.zariski_f64(&at(probe)) else { break };
                let idx: Vec<usize> = support.iter().map(|(i, _)| *i).collect();
                // x(lambda) = x0 + lambda x1 solves G_S x = (C_j . D(lambda))
                let (x0, x1) = if idx.is_empty() {
                    (Vec::new(), Vec::new())
                } else {
                    let gs: Matrix<f64> = idx
                        .iter()
                        .map(|&i| idx.iter().map(|&j| pair(g, &neg[i], &neg[j])).collect())
                        .collect();
                    let r0: Vec<f64> = idx.iter().map(|&i| pair(g, &d0, &neg[i])).collect();
                    let r1: Vec<f64> = idx.iter().map(|&i| pair(g, &dir, &neg[i])).collect();
                    match (linalg::solve(&gs, &r0), linalg::solve(&gs, &r1)) {
                        (Some(x0), Some(x1)) => (x0, x1),
                        _ => break,
                    }
                };
                let mut p0 = d0.clone();
                let mut p1 = dir.clone();
                for (k, &i) in idx.iter().enumerate() {
                    for c in 0..p0.len() {
                        p0[c] -= x0[k] * neg[i][c];
                        p1[c] -= x1[k] * neg[i][c];
                    }
                }
                let mut next = f64::INFINITY;
                let mut consider = |root: f64| {
                    if root > cur + 1e-12 * (1.0 + cur.abs()) && root < next {
                        next = root;
                    }
                };
                for k in 0..idx.len() {
                    if x1[k] < 0.0 {
                        consider(-x0[k] / x1[k]);
                    }
                }
                for c in neg.iter().enumerate().filter(|(i, _)| !idx.contains(i)).map(|(_, c)| c).chain(samples.iter()) {
                    let (q0, q1) = (pair(g, &p0, c), pair(g, &p1, c));
                    if q1 < 0.0 {
                        consider(-q0 / q1);
                    }
                }
                let (qa, qb, qc) = (pair(g, &p1, &p1), 2.0 * pair(g, &p0, &p1), pair(g, &p0, &p0));
                for r in real_roots(qa, qb, qc) {
                    consider(r);
                }
                if next >= b {
                    break;
                }
                kinks.push(next);
                cur = next;
            }
        }
        kinks.retain(|k| *k > lo && *k < hi);
        kinks.sort_by(f64::total_cmp);
        kinks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        Ok(kinks)
    }
}

fn real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a.abs() < 1e-14 {
        return if b.abs() < 1e-14 { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * s);
    let mut r = vec![q / a];
    if q != 0.0 {
        r.push(c / q);
    }
    r
}
