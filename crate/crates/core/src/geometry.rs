//! Divisor classes, valuations, divisorial measures and the volume-oracle
//! contract that the filtration and stability layers are written against.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A numerical divisor class with exact rational coordinates in the basis of
/// a declared model.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DivisorClass {
    basis: Arc<str>,
    coeffs: Vec<Rational>,
}

impl DivisorClass {
    pub fn new(basis: impl Into<Arc<str>>, coeffs: Vec<Rational>) -> Self {
        Self {
            basis: basis.into(),
            coeffs,
        }
    }

    pub fn from_ints(basis: impl Into<Arc<str>>, coeffs: &[i64]) -> Self {
        Self::new(basis, coeffs.iter().map(|&c| rational::int(c)).collect())
    }

    pub fn zero(basis: impl Into<Arc<str>>, rank: usize) -> Self {
        Self::new(basis, vec![Rational::zero(); rank])
    }

    pub fn basis(&self) -> &str {
        &self.basis
    }

    pub(crate) fn basis_arc(&self) -> &Arc<str> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational::to_f64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn ensure_compatible(&self, other: &DivisorClass) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                expected: self.basis.to_string(),
                found: other.basis.to_string(),
            });
        }
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                found: other.rank(),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.ensure_compatible(other)?;
        Ok(Self {
            basis: self.basis.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.checked_add(&other.scaled(&-Rational::one()))
    }

    pub fn scaled(&self, c: &Rational) -> DivisorClass {
        Self {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: &Rational, other: &DivisorClass) -> Result<DivisorClass> {
        self.checked_add(&other.scaled(c))
    }

    /// Same coordinates, reinterpreted in another basis of equal rank.
    pub fn rebased(&self, basis: impl Into<Arc<str>>) -> DivisorClass {
        Self::new(basis, self.coeffs.clone())
    }
}

impl fmt::Debug for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(rational::format).collect();
        write!(f, "{}[{}]", self.basis, parts.join(", "))
    }
}

/// How a valuation measures vanishing order on sections.
#[derive(Clone, Debug, PartialEq)]
pub enum OrderModel {
    /// Order zero on every nonzero section.
    Trivial,
    /// Order of vanishing along a prime divisor whose class is `class`. When
    /// `model` is set the divisor lives on that declared birational model.
    Curve {
        class: DivisorClass,
        model: Option<String>,
    },
    /// Monomial valuation with weight vector in the cocharacter lattice.
    Monomial { weights: Vec<i64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Valuation {
    pub name: String,
    pub log_discrepancy: Rational,
    pub order: OrderModel,
}

impl Valuation {
    pub const TRIVIAL_NAME: &'static str = "trivial";

    pub fn trivial() -> Self {
        Self {
            name: Self::TRIVIAL_NAME.to_string(),
            log_discrepancy: Rational::zero(),
            order: OrderModel::Trivial,
        }
    }

    pub fn curve(
        name: impl Into<String>,
        class: DivisorClass,
        model: Option<String>,
        log_discrepancy: Rational,
    ) -> Result<Self> {
        let name = name.into();
        if log_discrepancy.is_negative() {
            return Err(Error::InvalidModel(format!(
                "valuation `{name}` has negative log discrepancy"
            )));
        }
        Ok(Self {
            name,
            log_discrepancy,
            order: OrderModel::Curve { class, model },
        })
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.order, OrderModel::Trivial)
    }
}

/// Finitely many valuations with nonnegative masses summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorialMeasure {
    atoms: Vec<(Valuation, Rational)>,
}

impl DivisorialMeasure {
    pub fn new(atoms: Vec<(Valuation, Rational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("measure has no atoms".into()));
        }
        let mut seen = HashSet::new();
        let mut total = Rational::zero();
        for (v, m) in &atoms {
            if !seen.insert(v.name.as_str()) {
                return Err(Error::InvalidMeasure(format!(
                    "valuation `{}` appears twice",
                    v.name
                )));
            }
            if m.is_negative() || *m > Rational::one() {
                return Err(Error::InvalidMeasure(format!(
                    "mass {} of `{}` outside [0, 1]",
                    rational::format(m),
                    v.name
                )));
            }
            total += m;
        }
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!(
                "masses sum to {}, not 1",
                rational::format(&total)
            )));
        }
        Ok(Self { atoms })
    }

    /// Dirac mass at a single valuation.
    pub fn dirac(v: Valuation) -> Self {
        Self {
            atoms: vec![(v, Rational::one())],
        }
    }

    pub fn atoms(&self) -> &[(Valuation, Rational)] {
        &self.atoms
    }

    pub fn support(&self) -> Vec<Valuation> {
        self.atoms.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn masses(&self) -> Vec<Rational> {
        self.atoms.iter().map(|(_, m)| m.clone()).collect()
    }

    pub fn masses_f64(&self) -> Vec<f64> {
        self.atoms.iter().map(|(_, m)| rational::to_f64(m)).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms
            .iter()
            .all(|(v, m)| v.is_trivial() || m.is_zero())
    }

    /// The same measure with zero-mass atoms appended.
    pub fn with_zero_mass(&self, extra: &[Valuation]) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        atoms.extend(extra.iter().map(|v| (v.clone(), Rational::zero())));
        Self::new(atoms)
    }
}

/// Numerical tolerances for the analysis layers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub quadrature: f64,
    pub optimizer: f64,
    pub gradient: f64,
    pub threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: 1e-9,
            optimizer: 1e-8,
            gradient: 1e-6,
            threshold: 1e-9,
        }
    }
}

/// Pseudoeffective threshold: exact when the backend solves it in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum Threshold {
    Exact(Rational),
    Bracket { lower: f64, upper: f64 },
}

impl Threshold {
    pub fn value(&self) -> f64 {
        match self {
            Threshold::Exact(r) => rational::to_f64(r),
            Threshold::Bracket { lower, upper } => 0.5 * (lower + upper),
        }
    }

    /// A value no smaller than the true threshold.
    pub fn upper(&self) -> f64 {
        match self {
            Threshold::Exact(r) => rational::to_f64(r),
            Threshold::Bracket { upper, .. } => *upper,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Threshold::Exact(r) => Some(r),
            Threshold::Bracket { .. } => None,
        }
    }
}

/// One non-trivial valuation of a filtration together with its twist amount.
pub type Twist<'a> = (&'a Valuation, f64);

/// The volume oracle every backend implements.
///
/// `filtration_*` methods evaluate the twisted class `L - sum c_i E_i` for
/// non-trivial valuations in floating point; the trivial valuation is handled
/// by the caller.
pub trait GeometryModel: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn class_rank(&self) -> usize;
    fn canonical_class(&self) -> &DivisorClass;
    fn valuations(&self) -> &[Valuation];

    fn valuation(&self, name: &str) -> Result<Valuation> {
        if name == Valuation::TRIVIAL_NAME {
            return Ok(Valuation::trivial());
        }
        self.valuations()
            .iter()
            .find(|v| v.name == name)
            .cloned()
            .ok_or_else(|| Error::UnknownValuation(name.to_string()))
    }

    fn check_class(&self, d: &DivisorClass) -> Result<()> {
        if d.basis() != self.name() {
            return Err(Error::BasisMismatch {
                expected: self.name().to_string(),
                found: d.basis().to_string(),
            });
        }
        if d.rank() != self.class_rank() {
            return Err(Error::RankMismatch {
                expected: self.class_rank(),
                found: d.rank(),
            });
        }
        Ok(())
    }

    /// Rejects valuations the backend cannot evaluate.
    fn check_valuation(&self, v: &Valuation) -> Result<()>;

    /// Exact volume; zero off the big cone.
    fn volume(&self, d: &DivisorClass) -> Result<Rational>;

    fn is_big(&self, d: &DivisorClass) -> Result<bool> {
        Ok(self.volume(d)?.is_positive())
    }

    /// `d/ds vol(d + s h)` at `s = 0`, for `d` big.
    fn volume_derivative(&self, d: &DivisorClass, h: &DivisorClass) -> Result<f64>;

    /// Whether the twist of `l` by `gamma` along `v` is still big.
    fn twist_is_big(&self, l: &DivisorClass, v: &Valuation, gamma: &Rational) -> Result<bool>;

    /// `sup { g > 0 : twist(l, v, g) big }`.
    fn gamma_threshold(&self, l: &DivisorClass, v: &Valuation, tol: f64) -> Result<Threshold> {
        bisect_threshold(self, l, v, tol)
    }

    /// `vol(l - sum c_i E_i)` for non-trivial valuations, in floating point.
    fn filtration_volume(&self, l: &DivisorClass, twists: &[Twist<'_>]) -> Result<f64>;

    /// Points in `(lo, hi)` where `lambda -> vol(l - sum max(lambda - t_i, 0) E_i)`
    /// may fail to be polynomial. Backends that cannot tell return nothing and
    /// rely on adaptive quadrature.
    fn filtration_kinks(
        &self,
        _l: &DivisorClass,
        _shifts: &[Twist<'_>],
        _lo: f64,
        _hi: f64,
    ) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }

    /// `d/ds vol(l + s h - sum c_i E_i)` at `s = 0`.
    fn filtration_volume_derivative(
        &self,
        l: &DivisorClass,
        twists: &[Twist<'_>],
        h: &DivisorClass,
    ) -> Result<f64> {
        let eps = rational::ratio(1, 100_000);
        let up = l.add_scaled(&eps, h)?;
        let down = l.add_scaled(&-eps.clone(), h)?;
        let hi = self.filtration_volume(&up, twists)?;
        let lo = self.filtration_volume(&down, twists)?;
        Ok((hi - lo) / (2.0 * rational::to_f64(&eps)))
    }
}

/// Bisection on bigness over dyadic rationals until the bracket is narrower
/// than `tol`.
pub fn bisect_threshold<M: GeometryModel + ?Sized>(
    model: &M,
    l: &DivisorClass,
    v: &Valuation,
    tol: f64,
) -> Result<Threshold> {
    let (lo, hi) = bisect_bracket(model, l, v, tol)?;
    Ok(Threshold::Bracket {
        lower: rational::to_f64(&lo),
        upper: rational::to_f64(&hi),
    })
}

/// Returns `(lo, hi)` with `twist(lo)` big and `twist(hi)` not big.
pub fn bisect_bracket<M: GeometryModel + ?Sized>(
    model: &M,
    l: &DivisorClass,
    v: &Valuation,
    tol: f64,
) -> Result<(Rational, Rational)> {
    if v.is_trivial() {
        return Err(Error::TrivialValuation);
    }
    model.check_class(l)?;
    if !model.is_big(l)? {
        return Err(Error::NotBig);
    }
    let two = rational::int(2);
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    let mut doublings = 0;
    while model.twist_is_big(l, v, &hi)? {
        lo = hi.clone();
        hi = &hi * &two;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::InvalidModel(format!(
                "threshold of `{}` appears infinite (unbounded section polytope?)",
                v.name
            )));
        }
    }
    let tol = rational::from_f64(tol.max(1e-300)).unwrap_or_else(|| rational::ratio(1, 1 << 30));
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / &two;
        if model.twist_is_big(l, v, &mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Convenience wrapper matching the oracle contract.
pub fn is_big(model: &dyn GeometryModel, d: &DivisorClass) -> Result<bool> {
    model.check_class(d)?;
    model.is_big(d)
}

pub fn gamma_threshold(
    model: &dyn GeometryModel,
    l: &DivisorClass,
    v: &Valuation,
    tol: f64,
) -> Result<Threshold> {
    model.check_class(l)?;
    if v.is_trivial() {
        return Err(Error::TrivialValuation);
    }
    model.check_valuation(v)?;
    model.gamma_threshold(l, v, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn class_arithmetic_is_exact() {
        let a = DivisorClass::new("X", vec![ratio(1, 3), int(2)]);
        let b = DivisorClass::new("X", vec![ratio(2, 3), int(-1)]);
        let s = a.checked_add(&b).unwrap();
        assert_eq!(s.coeffs(), &[int(1), int(1)]);
        let t = a.add_scaled(&ratio(3, 2), &b).unwrap();
        assert_eq!(t.coeffs(), &[ratio(4, 3), ratio(1, 2)]);
        assert_eq!(s.checked_sub(&s).unwrap(), DivisorClass::zero("X", 2));
    }

    #[test]
    fn mixing_bases_is_an_error() {
        let a = DivisorClass::from_ints("X", &[1, 0]);
        let b = DivisorClass::from_ints("Y", &[1, 0]);
        assert!(matches!(a.checked_add(&b), Err(Error::BasisMismatch { .. })));
        let c = DivisorClass::from_ints("X", &[1]);
        assert!(matches!(a.checked_add(&c), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn measure_validation() {
        let line = Valuation::curve("line", DivisorClass::from_ints("P2", &[1]), None, int(1)).unwrap();
        let ok = DivisorialMeasure::new(vec![
            (Valuation::trivial(), ratio(1, 2)),
            (line.clone(), ratio(1, 2)),
        ]);
        assert!(ok.is_ok());
        let bad_sum = DivisorialMeasure::new(vec![(line.clone(), ratio(1, 2))]);
        assert!(matches!(bad_sum, Err(Error::InvalidMeasure(_))));
        let dup = DivisorialMeasure::new(vec![(line.clone(), ratio(1, 2)), (line.clone(), ratio(1, 2))]);
        assert!(dup.is_err());
        let neg = DivisorialMeasure::new(vec![(line.clone(), int(2)), (Valuation::trivial(), int(-1))]);
        assert!(neg.is_err());
        assert!(DivisorialMeasure::dirac(Valuation::trivial()).is_trivial());
    }

    #[test]
    fn negative_log_discrepancy_rejected() {
        let r = Valuation::curve("bad", DivisorClass::from_ints("X", &[1]), None, int(-1));
        assert!(r.is_err());
    }
}
