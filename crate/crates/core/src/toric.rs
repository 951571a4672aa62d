//! Smooth projective toric varieties from a declared complete fan.
//!
//! Divisors are ray-coefficient vectors `a`, with section polytope
//! `P_D = { m : <m, v_rho> >= -a_rho }` and volume `n! vol(P_D)`. Valuations
//! are monomial: the order of the monomial `m` along `w` is
//! `<m, w> - min_{P_L} <., w>`, anchored at zero on the polytope.

use std::sync::{Arc, Mutex};

use num::{Integer, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geometry::{DivisorClass, GeometryModel, OrderModel, Threshold, Twist, Valuation};
use crate::linalg::{self, Matrix, Scalar};
use crate::par::{self, Execution};
use crate::polytope::{self, HalfSpace, Polytope};
use crate::rational::{self, Rational};

/// Recently used floating-point section polytopes, keyed by class
/// coefficients. Quadrature asks for the same `P_L` many times over.
#[derive(Debug, Default)]
struct BaseCache(Mutex<Vec<(Vec<Rational>, Arc<Polytope<f64>>)>>);

impl Clone for BaseCache {
    fn clone(&self) -> Self {
        Self::default()
    }
}

const BASE_CACHE_SIZE: usize = 8;

#[derive(Clone, Debug)]
pub struct ToricModel {
    name: Arc<str>,
    dim: usize,
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
    canonical: DivisorClass,
    valuations: Vec<Valuation>,
    exec: Execution,
    bases: BaseCache,
}

fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

impl ToricModel {
    /// `cones` lists the maximal cones by ray index; for surfaces it may be
    /// omitted and is then read off the angular order of the rays.
    pub fn new(name: &str, rays: Vec<Vec<i64>>, cones: Option<Vec<Vec<usize>>>) -> Result<Self> {
        let dim = rays.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || rays.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidModel(format!("`{name}`: rays must be nonempty vectors of equal length")));
        }
        for r in &rays {
            if gcd_all(r) != 1 {
                return Err(Error::InvalidModel(format!("`{name}`: ray {r:?} is not primitive")));
            }
        }
        let normals: Matrix<Rational> = rays.iter().map(|r| r.iter().map(|&x| rational::int(x)).collect()).collect();
        if !polytope::normals_bound_every_polytope(&normals, dim) {
            return Err(Error::Unbounded);
        }
        let cones = match cones {
            Some(c) => c,
            None if dim == 2 => planar_cones(&rays),
            None if dim == 1 => (0..rays.len()).map(|i| vec![i]).collect(),
            None => {
                return Err(Error::InvalidModel(format!(
                    "`{name}`: maximal cones must be declared in dimension {dim}"
                )))
            }
        };
        for c in &cones {
            if c.len() != dim || c.iter().any(|&i| i >= rays.len()) {
                return Err(Error::InvalidModel(format!("`{name}`: malformed cone {c:?}")));
            }
            let m: Matrix<Rational> = c.iter().map(|&i| normals[i].clone()).collect();
            if linalg::determinant(&m).abs() != rational::int(1) {
                return Err(Error::InvalidModel(format!("`{name}`: cone {c:?} is not smooth")));
            }
        }
        let name: Arc<str> = name.into();
        let canonical = DivisorClass::from_ints(name.clone(), &vec![-1; rays.len()]);
        Ok(Self {
            name,
            dim,
            rays,
            cones,
            canonical,
            valuations: Vec::new(),
            exec: Execution::default(),
            bases: BaseCache::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_monomial_valuation(mut self, name: &str, weights: &[i64]) -> Result<Self> {
        let v = self.monomial_valuation(name, weights)?;
        if name == Valuation::TRIVIAL_NAME || self.valuations.iter().any(|w| w.name == name) {
            return Err(Error::InvalidModel(format!("duplicate or reserved valuation name `{name}`")));
        }
        self.valuations.push(v);
        Ok(self)
    }

    /// One valuation per ray, named `ray0`, `ray1`, ...
    pub fn with_ray_valuations(mut self) -> Result<Self> {
        for (i, r) in self.rays.clone().iter().enumerate() {
            self = self.with_monomial_valuation(&format!("ray{i}"), r)?;
        }
        Ok(self)
    }

    pub fn monomial_valuation(&self, name: &str, weights: &[i64]) -> Result<Valuation> {
        if weights.len() != self.dim || weights.iter().all(|&x| x == 0) {
            return Err(Error::InvalidModel(format!("valuation `{name}`: weight must be a nonzero {}-vector", self.dim)));
        }
        if gcd_all(weights) != 1 {
            return Err(Error::InvalidModel(format!("valuation `{name}`: weight {weights:?} is not primitive")));
        }
        Ok(Valuation {
            name: name.to_string(),
            log_discrepancy: self.log_discrepancy(weights)?,
            order: OrderModel::Monomial {
                weights: weights.to_vec(),
            },
        })
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn class(&self, coeffs: &[i64]) -> DivisorClass {
        DivisorClass::from_ints(self.name.clone(), coeffs)
    }

    /// Sum of the coordinates of `w` in the smooth cone containing it.
    pub fn log_discrepancy(&self, w: &[i64]) -> Result<Rational> {
        let wq: Vec<Rational> = w.iter().map(|&x| rational::int(x)).collect();
        for c in &self.cones {
            // columns are the cone's rays
            let a: Matrix<Rational> = (0..self.dim)
                .map(|row| c.iter().map(|&i| rational::int(self.rays[i][row])).collect())
                .collect();
            if let Some(coords) = linalg::solve(&a, &wq) {
                if coords.iter().all(|x| !x.is_negative()) {
                    return Ok(coords.iter().fold(Rational::zero(), |acc, x| acc + x));
                }
            }
        }
        Err(Error::InvalidModel(format!("weight {w:?} lies in no declared cone (fan not complete?)")))
    }

    fn halfspaces<S: Scalar>(&self, d: &DivisorClass) -> Vec<HalfSpace<S>> {
        self.rays
            .iter()
            .zip(d.coeffs())
            .map(|(r, a)| HalfSpace::new(r.iter().map(|&x| S::from_i64(x)).collect(), -S::from_rational(a)))
            .collect()
    }

    fn float_base(&self, l: &DivisorClass) -> Arc<Polytope<f64>> {
        let mut cache = self.bases.0.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((_, p)) = cache.iter().find(|(k, _)| k.as_slice() == l.coeffs()) {
            return p.clone();
        }
        let p = Arc::new(Polytope::new(self.dim, self.halfspaces(l)));
        if cache.len() >= BASE_CACHE_SIZE {
            cache.remove(0);
        }
        cache.push((l.coeffs().to_vec(), p.clone()));
        p
    }

    pub fn section_polytope(&self, d: &DivisorClass) -> Result<Polytope<Rational>> {
        self.check_class(d)?;
        Ok(Polytope::new(self.dim, self.halfspaces(d)))
    }

    /// `n!` times the Euclidean volume of `P_D`.
    pub fn polytope_volume(&self, d: &DivisorClass) -> Result<Rational> {
        Ok(self.section_polytope(d)?.normalized_volume())
    }

    /// `min_{P_L} <., w>`; `None` when `P_L` is empty.
    pub fn order_anchor(&self, l: &DivisorClass, w: &[i64]) -> Result<Option<Rational>> {
        let p = self.section_polytope(l)?;
        let wq: Vec<Rational> = w.iter().map(|&x| rational::int(x)).collect();
        Ok(p.linear_range(&wq).map(|(lo, _)| lo))
    }

    /// Normalized volume of `P_L` cut by `<m, w_i> - min_{P_L} <., w_i> >= c_i`.
    pub fn constrained_volume(&self, l: &DivisorClass, constraints: &[(Vec<i64>, Rational)]) -> Result<Rational> {
        let base = self.section_polytope(l)?;
        let mut hs = base.halfspaces().to_vec();
        for (w, c) in constraints {
            self.check_weight(w)?;
            let wq: Vec<Rational> = w.iter().map(|&x| rational::int(x)).collect();
            let Some((lo, _)) = base.linear_range(&wq) else {
                return Ok(Rational::zero());
            };
            hs.push(HalfSpace::new(wq, lo + c));
        }
        Ok(Polytope::new(self.dim, hs).normalized_volume())
    }

    /// Floating-point variant of [`Self::constrained_volume`] for real cut depths.
    pub fn constrained_volume_f64(&self, l: &DivisorClass, constraints: &[(Vec<i64>, f64)]) -> Result<f64> {
        self.check_class(l)?;
        let base = self.float_base(l);
        if self.dim == 2 {
            let mut cuts = Vec::with_capacity(constraints.len());
            for (w, c) in constraints {
                self.check_weight(w)?;
                let wf: Vec<f64> = w.iter().map(|&x| x as f64).collect();
                let Some((lo, _)) = base.linear_range(&wf) else {
                    return Ok(0.0);
                };
                cuts.push(HalfSpace::new(wf, lo + c));
            }
            return Ok(base.clipped_normalized_area(&cuts));
        }
        let mut hs = base.halfspaces().to_vec();
        for (w, c) in constraints {
            self.check_weight(w)?;
            let wf: Vec<f64> = w.iter().map(|&x| x as f64).collect();
            let Some((lo, _)) = base.linear_range(&wf) else {
                return Ok(0.0);
            };
            hs.push(HalfSpace::new(wf, lo + c));
        }
        Ok(Polytope::new(self.dim, hs).normalized_volume().max(0.0))
    }

    fn check_weight(&self, w: &[i64]) -> Result<()> {
        if w.len() != self.dim {
            return Err(Error::RankMismatch {
                expected: self.dim,
                found: w.len(),
            });
        }
        Ok(())
    }

    fn weights(v: &Valuation) -> Result<&[i64]> {
        match &v.order {
            OrderModel::Monomial { weights } => Ok(weights),
            _ => Err(Error::UnsupportedValuation(v.name.clone())),
        }
    }

    /// Lattice points of `k P_L`: the monomial basis of `H^0(kL)`.
    pub fn section_basis(&self, l: &DivisorClass, k: u32) -> Result<Vec<Vec<i64>>> {
        if k == 0 {
            return Err(Error::InvalidArgument("level k must be positive".into()));
        }
        let kl = l.scaled(&rational::int(k as i64));
        let offsets: Vec<i64> = kl
            .coeffs()
            .iter()
            .map(|a| {
                if a.is_integer() {
                    a.to_integer().to_i64().map(|x| -x).ok_or(())
                } else {
                    Err(())
                }
            })
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("{k}L is not integral")))?;
        let p = self.section_polytope(&kl)?;
        if p.is_empty() {
            return Ok(Vec::new());
        }
        let mut lo = vec![i64::MAX; self.dim];
        let mut hi = vec![i64::MIN; self.dim];
        for v in p.vertices() {
            for (i, x) in v.iter().enumerate() {
                lo[i] = lo[i].min(x.floor().to_integer().to_i64().unwrap_or(i64::MIN));
                hi[i] = hi[i].max(x.ceil().to_integer().to_i64().unwrap_or(i64::MAX));
            }
        }
        // slabs along the first coordinate
        let slabs: Vec<i64> = (lo[0]..=hi[0]).collect();
        let rays = &self.rays;
        Ok(par::flat_map(self.exec, &slabs, |&x0| {
            let mut slo = lo.clone();
            let mut shi = hi.clone();
            slo[0] = x0;
            shi[0] = x0;
            polytope::lattice_points(rays, &offsets, &slo, &shi)
        }))
    }

    /// Order of the monomial `m` of `H^0(kL)` along `w`, normalized so the
    /// minimum over `k P_L` is zero.
    pub fn monomial_order(&self, w: &[i64], anchor: &Rational, k: u32, m: &[i64]) -> Rational {
        let pairing: i64 = w.iter().zip(m).map(|(a, b)| a * b).sum();
        rational::int(pairing) - anchor * rational::int(k as i64)
    }
}

/// Consecutive rays in angular order span the maximal cones of a complete
/// planar fan.
fn planar_cones(rays: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..rays.len()).collect();
    idx.sort_by(|&a, &b| {
        let ta = (rays[a][1] as f64).atan2(rays[a][0] as f64);
        let tb = (rays[b][1] as f64).atan2(rays[b][0] as f64);
        ta.total_cmp(&tb)
    });
    (0..idx.len()).map(|k| vec![idx[k], idx[(k + 1) % idx.len()]]).collect()
}

impl GeometryModel for ToricModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn class_rank(&self) -> usize {
        self.rays.len()
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
            OrderModel::Monomial { weights } => self.check_weight(weights),
            OrderModel::Curve { .. } => Err(Error::UnsupportedValuation(v.name.clone())),
        }
    }

    fn volume(&self, d: &DivisorClass) -> Result<Rational> {
        self.polytope_volume(d)
    }

    /// Richardson-extrapolated central difference of the exact volume.
    fn volume_derivative(&self, d: &DivisorClass, h: &DivisorClass) -> Result<f64> {
        self.check_class(h)?;
        if !self.is_big(d)? {
            return Err(Error::NotBig);
        }
        let diff = |eps: &Rational| -> Result<Rational> {
            let up = self.volume(&d.add_scaled(eps, h)?)?;
            let down = self.volume(&d.add_scaled(&-eps.clone(), h)?)?;
            Ok((up - down) / (eps * rational::int(2)))
        };
        let eps = rational::ratio(1, 1 << 20);
        let coarse = diff(&eps)?;
        let fine = diff(&(eps / rational::int(2)))?;
        Ok(rational::to_f64(&((fine * rational::int(4) - coarse) / rational::int(3))))
    }

    fn twist_is_big(&self, l: &DivisorClass, v: &Valuation, gamma: &Rational) -> Result<bool> {
        let w = Self::weights(v)?.to_vec();
        Ok(self.constrained_volume(l, &[(w, gamma.clone())])?.is_positive())
    }

    /// Width of `P_L` along `w`.
    fn gamma_threshold(&self, l: &DivisorClass, v: &Valuation, _tol: f64) -> Result<Threshold> {
        let w = Self::weights(v)?;
        if !self.is_big(l)? {
            return Err(Error::NotBig);
        }
        let p = self.section_polytope(l)?;
        let wq: Vec<Rational> = w.iter().map(|&x| rational::int(x)).collect();
        let (lo, hi) = p.linear_range(&wq).ok_or(Error::NotBig)?;
        Ok(Threshold::Exact(hi - lo))
    }

    fn filtration_volume(&self, l: &DivisorClass, twists: &[Twist<'_>]) -> Result<f64> {
        let cons: Vec<(Vec<i64>, f64)> = twists
            .iter()
            .filter(|(v, _)| !v.is_trivial())
            .map(|(v, c)| Ok((Self::weights(v)?.to_vec(), *c)))
            .collect::<Result<_>>()?;
        self.constrained_volume_f64(l, &cons)
    }

    /// Concurrency events of `n + 1` hyperplanes among the facets and the
    /// moving cuts: the only places the combinatorial type can change.
    fn filtration_kinks(&self, l: &DivisorClass, shifts: &[Twist<'_>], lo: f64, hi: f64) -> Result<Vec<f64>> {
        self.check_class(l)?;
        let base = self.float_base(l);
        let mut cuts = Vec::new();
        for (v, t) in shifts.iter().filter(|(v, _)| !v.is_trivial()) {
            let w: Vec<f64> = Self::weights(v)?.iter().map(|&x| x as f64).collect();
            let Some((anchor, _)) = base.linear_range(&w) else {
                return Ok(Vec::new());
            };
            cuts.push((w, anchor, *t));
        }
        let mut breaks: Vec<f64> = cuts.iter().map(|c| c.2).filter(|t| *t > lo && *t < hi).collect();
        breaks.push(lo);
        breaks.push(hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let facets: Vec<(Vec<f64>, f64)> = base.halfspaces().iter().map(|h| (h.normal.clone(), h.offset)).collect();
        let mut kinks = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            // rows: (normal, offset at lambda = 0, slope in lambda)
            let mut rows: Vec<(Vec<f64>, f64, f64)> = facets.iter().map(|(n, o)| (n.clone(), *o, 0.0)).collect();
            let first_cut = rows.len();
            for (wv, anchor, t) in &cuts {
                if *t <= a {
                    rows.push((wv.clone(), anchor - t, 1.0));
                }
            }
            if rows.len() == first_cut {
                continue;
            }
            for idx in polytope::k_subsets(rows.len(), self.dim + 1) {
                if idx.iter().all(|&i| i < first_cut) {
                    continue;
                }
                let m0: Matrix<f64> = idx
                    .iter()
                    .map(|&i| {
                        let mut r = rows[i].0.clone();
                        r.push(rows[i].1);
                        r
                    })
                    .collect();
                let m1: Matrix<f64> = idx
                    .iter()
                    .map(|&i| {
                        let mut r = rows[i].0.clone();
                        r.push(rows[i].2);
                        r
                    })
                    .collect();
                let d1 = linalg::determinant(&m1);
                if d1.abs() < 1e-12 {
                    continue;
                }
                let root = -linalg::determinant(&m0) / d1;
                if root > a && root < b {
                    kinks.push(root);
                }
            }
        }
        kinks.sort_by(f64::total_cmp);
        kinks.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        Ok(kinks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::int;

    #[test]
    fn polytope_volumes() {
        let p2 = catalog::p2_toric();
        assert_eq!(p2.polytope_volume(&p2.class(&[0, 0, 3])).unwrap(), int(9));
        assert_eq!(p2.polytope_volume(&p2.class(&[1, 1, 1])).unwrap(), int(9));
        assert_eq!(p2.polytope_volume(&p2.class(&[0, 0, 0])).unwrap(), int(0));
        let p1p1 = catalog::p1xp1_toric();
        assert_eq!(p1p1.polytope_volume(&p1p1.class(&[0, 0, 1, 1])).unwrap(), int(2));
        let bl = catalog::blowup_p2_toric();
        assert_eq!(bl.polytope_volume(bl.canonical_class()).unwrap(), int(0));
        assert_eq!(bl.polytope_volume(&bl.class(&[1, 1, 1, 1])).unwrap(), int(8));
    }

    #[test]
    fn constrained_volumes() {
        let p2 = catalog::p2_toric();
        let l = p2.class(&[0, 0, 3]);
        let e1 = vec![1, 0];
        assert_eq!(p2.constrained_volume(&l, &[]).unwrap(), int(9));
        assert_eq!(p2.constrained_volume(&l, &[(e1.clone(), int(0))]).unwrap(), int(9));
        assert_eq!(p2.constrained_volume(&l, &[(e1.clone(), int(1))]).unwrap(), int(4));
        assert_eq!(p2.constrained_volume(&l, &[(e1.clone(), int(3))]).unwrap(), int(0));
        assert!((p2.constrained_volume_f64(&l, &[(e1, 1.0)]).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn section_bases() {
        let p2 = catalog::p2_toric();
        let l = p2.class(&[0, 0, 3]);
        assert_eq!(p2.section_basis(&l, 1).unwrap().len(), 10);
        assert_eq!(p2.section_basis(&l, 2).unwrap().len(), 28);
        let p1p1 = catalog::p1xp1_toric();
        assert_eq!(p1p1.section_basis(&p1p1.class(&[0, 0, 1, 1]), 1).unwrap().len(), 4);
        let half = p2.class(&[0, 0, 1]).scaled(&rational::ratio(1, 2));
        assert!(p2.section_basis(&half, 1).is_err());
        assert_eq!(p2.section_basis(&half, 2).unwrap().len(), 3);
    }

    #[test]
    fn ehrhart_convergence_at_k50() {
        let p2 = catalog::p2_toric();
        let l = p2.class(&[0, 0, 3]);
        let k = 50u32;
        let n = p2.section_basis(&l, k).unwrap().len() as f64;
        let approx = n / (k as f64).powi(2) * 2.0;
        assert!((approx - 9.0).abs() / 9.0 < 0.05);
    }

    #[test]
    fn log_discrepancies() {
        let p2 = catalog::p2_toric();
        for r in p2.rays() {
            assert_eq!(p2.log_discrepancy(r).unwrap(), int(1));
        }
        assert_eq!(p2.log_discrepancy(&[1, 1]).unwrap(), int(2));
        assert_eq!(p2.log_discrepancy(&[2, 1]).unwrap(), int(3));
    }

    #[test]
    fn thresholds_are_polytope_widths() {
        let p2 = catalog::p2_toric();
        let e1 = p2.valuation("e1").unwrap();
        let t = p2.gamma_threshold(&p2.class(&[0, 0, 3]), &e1, 1e-9).unwrap();
        assert_eq!(t, Threshold::Exact(int(3)));
        let bl = catalog::blowup_p2_toric();
        let e = bl.valuation("ord_E").unwrap();
        assert_eq!(bl.gamma_threshold(&bl.class(&[1, 1, 1, 1]), &e, 1e-9).unwrap(), Threshold::Exact(int(2)));
        // bisection agrees with the exact width
        let b = crate::geometry::bisect_threshold(&bl, &bl.class(&[1, 1, 1, 1]), &e, 1e-9).unwrap();
        assert!((b.value() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_fans() {
        assert!(matches!(ToricModel::new("half", vec![vec![1, 0], vec![0, 1], vec![-1, 0]], None), Err(Error::Unbounded)));
        assert!(ToricModel::new("np", vec![vec![2, 0], vec![0, 1], vec![-1, -1]], None).is_err());
        // weighted projective plane P(1,1,2) is singular
        assert!(ToricModel::new("sing", vec![vec![1, 0], vec![0, 1], vec![-1, -2]], None).is_err());
    }

    #[test]
    fn three_dimensional_projective_space() {
        let p3 = ToricModel::new(
            "P3",
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, -1, -1]],
            Some(vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]),
        )
        .unwrap();
        assert_eq!(p3.volume(p3.canonical_class()).unwrap(), int(0));
        assert_eq!(p3.volume(&p3.class(&[1, 1, 1, 1])).unwrap(), int(64));
        assert_eq!(p3.log_discrepancy(&[1, 1, 1]).unwrap(), int(3));
        assert_eq!(p3.section_basis(&p3.class(&[0, 0, 0, 1]), 2).unwrap().len(), 10);
    }

    #[test]
    fn kinks_cover_vertex_crossings() {
        let bl = catalog::blowup_p2_toric();
        let l = bl.class(&[1, 1, 1, 1]);
        let e1 = bl.valuation("e1").unwrap();
        // cutting the -K polygon of Bl_p P^2 along e1 passes the vertex of the E edge at lambda = 1
        let kinks = bl.filtration_kinks(&l, &[(&e1, 0.0)], 0.0, 2.0).unwrap();
        assert!(kinks.iter().any(|k| (k - 1.0).abs() < 1e-9), "{kinks:?}");
    }
}
