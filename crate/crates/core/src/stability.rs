//! Norms of divisorial measures and the stability invariants built on them.
//!
//! The norm of `mu = sum xi_i E_i` is `sup_t g(t)` with
//! `g(t) = S_L(t) - <xi, t>`. Since `g` is concave and invariant under
//! `t -> t + c(1, ..., 1)`, it is maximized over the box `[0, max gamma + 1]^m`
//! and maximizers are reported with `min t_i = 0`.

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::filtrations::ExpectedOrder;
use crate::geometry::{DivisorClass, DivisorialMeasure, GeometryModel, Tolerances, Valuation};
use crate::par::{self, Execution};
use crate::rational::{self, Rational};
use crate::toric::ToricModel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub tolerances: Tolerances,
    /// Number of ascent runs; the first two start at the origin and the box
    /// center, the rest are drawn from the seeded generator.
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Starts ending within this much of the best value count as maximizers.
    pub epsilon_argmax: f64,
    /// L-infinity radius used to merge maximizers into clusters.
    pub cluster_radius: f64,
    pub execution: Execution,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            starts: 8,
            seed: 0,
            max_iterations: 400,
            epsilon_argmax: 1e-5,
            cluster_radius: 1e-4,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormResult {
    pub value: f64,
    /// Cluster representatives of the near-maximizers, normalized to `min t = 0`,
    /// best first.
    pub maximizers: Vec<Vec<f64>>,
    pub box_bound: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
struct Run {
    t: Vec<f64>,
    value: f64,
    converged: bool,
}

fn clamp_box(t: &mut [f64], bound: f64) {
    for x in t {
        *x = x.clamp(0.0, bound);
    }
}

fn normalize(t: &[f64]) -> Vec<f64> {
    let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
    t.iter().map(|x| x - lo).collect()
}

struct Objective<'s, 'm> {
    s: &'s ExpectedOrder<'m>,
    xi: Vec<f64>,
}

impl Objective<'_, '_> {
    fn eval(&self, t: &[f64]) -> Result<f64> {
        let pairing: f64 = self.xi.iter().zip(t).map(|(a, b)| a * b).sum();
        Ok(self.s.eval(t)? - pairing)
    }

    fn gradient(&self, t: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(t.len());
        let mut x = t.to_vec();
        for i in 0..t.len() {
            x[i] = t[i] + h;
            let up = self.eval(&x)?;
            x[i] = t[i] - h;
            let down = self.eval(&x)?;
            x[i] = t[i];
            out.push((up - down) / (2.0 * h));
        }
        Ok(out)
    }

    /// Golden-section search for the maximum of `s -> g(t + s d)` on `[a, b]`.
    fn line_max(&self, t: &[f64], d: &[f64], a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let at = |s: f64| -> Vec<f64> { t.iter().zip(d).map(|(x, y)| x + s * y).collect() };
        let (mut a, mut b) = (a, b);
        let mut c = b - INV_PHI * (b - a);
        let mut e = a + INV_PHI * (b - a);
        let mut fc = self.eval(&at(c))?;
        let mut fe = self.eval(&at(e))?;
        while b - a > tol {
            if fc >= fe {
                b = e;
                e = c;
                fe = fc;
                c = b - INV_PHI * (b - a);
                fc = self.eval(&at(c))?;
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + INV_PHI * (b - a);
                fe = self.eval(&at(e))?;
            }
        }
        Ok(if fc >= fe { (c, fc) } else { (e, fe) })
    }

    fn ascend(&self, start: Vec<f64>, bound: f64, settings: &Settings) -> Result<Run> {
        let tol = settings.tolerances.optimizer;
        let h = settings.tolerances.gradient;
        let mut t = start;
        clamp_box(&mut t, bound);
        let mut f = self.eval(&t)?;
        let mut step = 0.5 * bound;
        let mut converged = false;
        for _ in 0..settings.max_iterations {
            let mut d = self.gradient(&t, h)?;
            for (di, ti) in d.iter_mut().zip(&t) {
                if (*ti <= 0.0 && *di < 0.0) || (*ti >= bound && *di > 0.0) {
                    *di = 0.0;
                }
            }
            if d.iter().all(|x| x.abs() <= tol) {
                converged = true;
                break;
            }
            let mut s = step;
            let mut accepted = None;
            while s > 1e-14 {
                let mut cand: Vec<f64> = t.iter().zip(&d).map(|(x, y)| x + s * y).collect();
                clamp_box(&mut cand, bound);
                let fc = self.eval(&cand)?;
                let gain: f64 = d.iter().zip(cand.iter().zip(&t)).map(|(g, (a, b))| g * (a - b)).sum();
                if fc > f && fc >= f + 1e-4 * gain {
                    accepted = Some((cand, fc));
                    break;
                }
                s *= 0.5;
            }
            match accepted {
                Some((cand, fc)) => {
                    let moved = cand.iter().zip(&t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    let gain = fc - f;
                    t = cand;
                    f = fc;
                    step = (2.0 * s).min(bound);
                    if gain <= tol * 1e-3 && moved <= tol {
                        converged = true;
                        break;
                    }
                }
                // no ascent along the smoothed gradient: a kink, left to the polish
                None => break,
            }
        }
        let (t, f, polished) = self.polish(t, f, bound, settings)?;
        Ok(Run {
            t,
            value: f,
            converged: converged || polished,
        })
    }

    /// Line searches along coordinate and pairwise-difference directions,
    /// repeated until a full sweep gains less than the optimizer tolerance.
    fn polish(&self, mut t: Vec<f64>, mut f: f64, bound: f64, settings: &Settings) -> Result<(Vec<f64>, f64, bool)> {
        let m = t.len();
        let mut dirs = Vec::new();
        for i in 0..m {
            let mut d = vec![0.0; m];
            d[i] = 1.0;
            dirs.push(d);
        }
        for i in 0..m {
            for j in i + 1..m {
                let mut d = vec![0.0; m];
                d[i] = 1.0;
                d[j] = -1.0;
                dirs.push(d);
            }
        }
        let tol = settings.tolerances.optimizer;
        for _ in 0..50 {
            let before = f;
            for d in &dirs {
                let (mut a, mut b) = (f64::NEG_INFINITY, f64::INFINITY);
                for (ti, di) in t.iter().zip(d) {
                    if *di > 0.0 {
                        a = a.max(-ti / di);
                        b = b.min((bound - ti) / di);
                    } else if *di < 0.0 {
                        a = a.max((bound - ti) / di);
                        b = b.min(-ti / di);
                    }
                }
                if b - a <= tol {
                    continue;
                }
                // g is 2-Lipschitz, so this bounds the value error by the tolerance
                let (s, fs) = self.line_max(&t, d, a, b, 0.5 * tol)?;
                if fs > f {
                    for (ti, di) in t.iter_mut().zip(d) {
                        *ti += s * di;
                    }
                    clamp_box(&mut t, bound);
                    f = fs;
                }
            }
            if f - before <= tol {
                return Ok((t, f, true));
            }
        }
        Ok((t, f, false))
    }
}

fn box_bound(s: &ExpectedOrder<'_>) -> f64 {
    s.thresholds().iter().copied().fold(0.0, f64::max) + 1.0
}

fn start_points(m: usize, bound: f64, settings: &Settings) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let n = settings.starts.max(1);
    (0..n)
        .map(|k| match k {
            0 => vec![0.0; m],
            1 => vec![0.5 * bound; m],
            _ => (0..m).map(|_| rng.gen_range(0.0..=bound)).collect(),
        })
        .collect()
}

/// Greedy clustering of near-maximizers in the L-infinity norm.
fn cluster(mut runs: Vec<Run>, eps: f64, radius: f64) -> (f64, Vec<Vec<f64>>) {
    runs.sort_by(|a, b| b.value.total_cmp(&a.value));
    let best = runs[0].value;
    let mut reps: Vec<Vec<f64>> = Vec::new();
    for r in runs.iter().filter(|r| r.value >= best - eps) {
        let t = normalize(&r.t);
        let close = reps
            .iter()
            .any(|c| c.iter().zip(&t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= radius);
        if !close {
            reps.push(t);
        }
    }
    (best, reps)
}

fn maximize(s: &ExpectedOrder<'_>, xi: &[f64], settings: &Settings) -> Result<NormResult> {
    let bound = box_bound(s);
    let obj = Objective { s, xi: xi.to_vec() };
    let starts = start_points(xi.len(), bound, settings);
    let runs: Vec<Result<Run>> = par::map(settings.execution, &starts, |t0| obj.ascend(t0.clone(), bound, settings));
    let runs: Vec<Run> = runs.into_iter().collect::<Result<_>>()?;
    if runs.iter().any(|r| !r.value.is_finite()) {
        return Err(Error::Convergence("objective is not finite".into()));
    }
    let converged = runs.iter().all(|r| r.converged);
    let (value, maximizers) = cluster(runs, settings.epsilon_argmax, settings.cluster_radius);
    Ok(NormResult {
        value,
        maximizers,
        box_bound: bound,
        converged,
    })
}

fn expected_order<'m>(model: &'m dyn GeometryModel, l: &DivisorClass, mu: &DivisorialMeasure, settings: &Settings) -> Result<ExpectedOrder<'m>> {
    ExpectedOrder::new(model, l, &mu.support(), settings.tolerances)
}

/// `||mu||_L`.
pub fn norm(model: &dyn GeometryModel, l: &DivisorClass, mu: &DivisorialMeasure, settings: &Settings) -> Result<NormResult> {
    let s = expected_order(model, l, mu, settings)?;
    maximize(&s, &mu.masses_f64(), settings)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnlargedSupportCheck {
    pub holds: bool,
    pub base: f64,
    pub enlarged: f64,
}

/// Recomputes the norm with `extra` added to the support at zero mass; the
/// two values must agree.
pub fn norm_enlarged_support_check(
    model: &dyn GeometryModel,
    l: &DivisorClass,
    mu: &DivisorialMeasure,
    extra: &[Valuation],
    slack: f64,
    settings: &Settings,
) -> Result<EnlargedSupportCheck> {
    if let Some(v) = extra.iter().find(|v| mu.atoms().iter().any(|(w, _)| w.name == v.name)) {
        return Err(Error::InvalidArgument(format!("`{}` is already in the support", v.name)));
    }
    let base = norm(model, l, mu, settings)?.value;
    let enlarged = norm(model, l, &mu.with_zero_mass(extra)?, settings)?.value;
    Ok(EnlargedSupportCheck {
        holds: (base - enlarged).abs() <= slack,
        base,
        enlarged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn check_direction(model: &dyn GeometryModel, l: &DivisorClass, h: &DivisorClass) -> Result<()> {
    model.check_class(h)?;
    let eps = rational::ratio(1, 1_000_000);
    let up = model.is_big(&l.add_scaled(&eps, h)?)?;
    let down = model.is_big(&l.add_scaled(&-eps, h)?)?;
    if !up && !down {
        return Err(Error::InvalidArgument("direction leaves the big cone both ways".into()));
    }
    Ok(())
}

/// One-sided derivative of `L -> ||mu||_L` in the direction `h`, given the
/// maximizers of the norm at `L`: the right derivative is the largest
/// derivative of `S_L(t)` over maximizers, the left one the smallest.
pub fn danskin_from(
    model: &dyn GeometryModel,
    l: &DivisorClass,
    mu: &DivisorialMeasure,
    norm: &NormResult,
    h: &DivisorClass,
    side: Side,
    settings: &Settings,
) -> Result<f64> {
    if norm.maximizers.is_empty() {
        return Err(Error::Convergence("no maximizer of the norm functional".into()));
    }
    check_direction(model, l, h)?;
    let s = expected_order(model, l, mu, settings)?;
    let slopes: Vec<Result<f64>> = par::map(settings.execution, &norm.maximizers, |t| s.class_derivative(t, h));
    let slopes: Vec<f64> = slopes.into_iter().collect::<Result<_>>()?;
    Ok(match side {
        Side::Right => slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Side::Left => slopes.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

pub fn danskin_derivative(
    model: &dyn GeometryModel,
    l: &DivisorClass,
    mu: &DivisorialMeasure,
    h: &DivisorClass,
    side: Side,
    settings: &Settings,
) -> Result<f64> {
    let n = norm(model, l, mu, settings)?;
    danskin_from(model, l, mu, &n, h, side, settings)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaReport {
    /// `sum xi_i A(E_i)`, exact.
    pub entropy_term: Rational,
    /// Left derivative of the norm in the canonical direction.
    pub derivative_term: f64,
    pub beta: f64,
    pub norm: f64,
    /// `beta / norm`, absent when the norm vanishes.
    pub stability_ratio: Option<f64>,
    pub maximizers: usize,
}

pub fn entropy(mu: &DivisorialMeasure) -> Rational {
    mu.atoms()
        .iter()
        .fold(Rational::zero(), |acc, (v, m)| acc + m * &v.log_discrepancy)
}

/// Norms below this are treated as zero when forming ratios.
fn zero_norm(settings: &Settings) -> f64 {
    10.0 * settings.tolerances.optimizer
}

pub fn beta(model: &dyn GeometryModel, l: &DivisorClass, mu: &DivisorialMeasure, settings: &Settings) -> Result<BetaReport> {
    let n = norm(model, l, mu, settings)?;
    let k = model.canonical_class().clone();
    let derivative_term = danskin_from(model, l, mu, &n, &k, Side::Left, settings)?;
    let entropy_term = entropy(mu);
    let beta = rational::to_f64(&entropy_term) + derivative_term;
    Ok(BetaReport {
        entropy_term,
        derivative_term,
        beta,
        norm: n.value,
        stability_ratio: (n.value > zero_norm(settings)).then(|| beta / n.value),
        maximizers: n.maximizers.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaResult {
    pub value: f64,
    pub witness: Valuation,
    /// `(name, A, S, A/S)` for every candidate, in input order.
    pub ratios: Vec<(String, f64, f64, f64)>,
}

/// `min A(E) / S_{-K}(E)` over the candidates.
pub fn delta_anticanonical(model: &dyn GeometryModel, candidates: &[Valuation], settings: &Settings) -> Result<DeltaResult> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("empty candidate set".into()));
    }
    if let Some(v) = candidates.iter().find(|v| v.is_trivial()) {
        return Err(Error::InvalidArgument(format!("`{}` is the trivial valuation", v.name)));
    }
    let l = model.canonical_class().scaled(&rational::int(-1));
    if !model.is_big(&l)? {
        return Err(Error::NotBig);
    }
    let rows: Vec<Result<(String, f64, f64, f64)>> = par::map(settings.execution, candidates, |v| {
        let s = ExpectedOrder::new(model, &l, std::slice::from_ref(v), settings.tolerances)?.eval(&[0.0])?;
        let a = rational::to_f64(&v.log_discrepancy);
        Ok((v.name.clone(), a, s, a / s))
    });
    let ratios: Vec<(String, f64, f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    // ties within quadrature noise go to the earliest candidate
    let lowest = ratios.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
    let best = ratios
        .iter()
        .position(|r| r.3 <= lowest + 10.0 * settings.tolerances.quadrature)
        .expect("nonempty");
    Ok(DeltaResult {
        value: ratios[best].3,
        witness: candidates[best].clone(),
        ratios,
    })
}

/// Declared non-trivial valuations of a model.
pub fn declared_candidates(model: &dyn GeometryModel) -> Vec<Valuation> {
    model.valuations().iter().filter(|v| !v.is_trivial()).cloned().collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Monomial valuations for all primitive vectors with coordinates bounded by
/// `height` in absolute value, named like `w[1,-2]`.
pub fn toric_candidates(model: &ToricModel, height: i64) -> Result<Vec<Valuation>> {
    if height < 1 {
        return Err(Error::InvalidArgument("height must be positive".into()));
    }
    let n = model.dimension();
    let side = (2 * height + 1) as usize;
    let mut out = Vec::new();
    for idx in 0..side.pow(n as u32) {
        let mut rest = idx;
        let w: Vec<i64> = (0..n)
            .map(|_| {
                let c = (rest % side) as i64 - height;
                rest /= side;
                c
            })
            .collect();
        if w.iter().fold(0, |g, &c| gcd(g, c)) != 1 {
            continue;
        }
        let name = format!("w[{}]", w.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","));
        out.push(model.monomial_valuation(&name, &w)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatDirection {
    pub index: usize,
    pub forward: f64,
    pub backward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MASolution {
    pub t_star: Vec<f64>,
    /// `(valuation, dS/dt_i)` at `t_star`.
    pub measure_out: Vec<(String, f64)>,
    pub residual: f64,
    pub flat_directions: Vec<FlatDirection>,
    pub value: f64,
    pub maximizers: Vec<Vec<f64>>,
}

/// Maximizes `S_L(t) - <xi, t>` and reads off the measure at the optimum as
/// the gradient of `S_L`.
pub fn ma_solve(model: &dyn GeometryModel, l: &DivisorClass, mu: &DivisorialMeasure, settings: &Settings) -> Result<MASolution> {
    let s = expected_order(model, l, mu, settings)?;
    let xi = mu.masses_f64();
    let n = maximize(&s, &xi, settings)?;
    let h = 0.1 * settings.tolerances.gradient;
    let kink = 10.0 * settings.tolerances.gradient;

    let mut best: Option<(f64, usize, Vec<f64>, Vec<FlatDirection>)> = None;
    for (k, t) in n.maximizers.iter().enumerate() {
        let s0 = s.eval(t)?;
        let mut grad = Vec::with_capacity(t.len());
        let mut flats = Vec::new();
        let mut x = t.clone();
        for i in 0..t.len() {
            x[i] = t[i] + h;
            let up = s.eval(&x)?;
            x[i] = t[i] - h;
            let down = s.eval(&x)?;
            x[i] = t[i];
            let (fwd, bwd) = ((up - s0) / h, (s0 - down) / h);
            if (fwd - bwd).abs() > kink {
                flats.push(FlatDirection {
                    index: i,
                    forward: fwd,
                    backward: bwd,
                });
            }
            grad.push(0.5 * (fwd + bwd));
        }
        let residual = grad.iter().zip(&xi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let better = match &best {
            None => true,
            Some((r, _, _, f)) => flats.len() < f.len() || (flats.len() == f.len() && residual < *r),
        };
        if better {
            best = Some((residual, k, grad, flats));
        }
    }
    let (residual, k, grad, flat_directions) =
        best.ok_or_else(|| Error::Convergence("no maximizer of the Monge-Ampere functional".into()))?;
    Ok(MASolution {
        t_star: n.maximizers[k].clone(),
        measure_out: mu.atoms().iter().map(|(v, _)| v.name.clone()).zip(grad).collect(),
        residual,
        flat_directions,
        value: n.value,
        maximizers: n.maximizers,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Some measure has `beta < eps * norm`.
    Unstable,
    /// Every probed measure satisfies the inequality; evidence, not proof.
    NoViolationFound,
    /// No probed measure has nonzero norm.
    Vacuous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub reports: Vec<BetaReport>,
    pub min_ratio: Option<f64>,
    /// Index of the measure attaining `min_ratio`.
    pub argmin: Option<usize>,
    /// Indices of measures with `beta < eps * norm`.
    pub violations: Vec<usize>,
    pub verdict: Verdict,
}

pub fn divisorial_stability_probe(
    model: &dyn GeometryModel,
    l: &DivisorClass,
    measures: &[DivisorialMeasure],
    eps: f64,
    settings: &Settings,
) -> Result<ProbeReport> {
    let reports: Vec<BetaReport> = measures.iter().map(|mu| beta(model, l, mu, settings)).collect::<Result<_>>()?;
    let slack = settings.tolerances.gradient;
    let mut min_ratio: Option<(usize, f64)> = None;
    let mut violations = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        let Some(ratio) = r.stability_ratio else { continue };
        if min_ratio.map_or(true, |(_, m)| ratio < m) {
            min_ratio = Some((i, ratio));
        }
        if r.beta < eps * r.norm - slack {
            violations.push(i);
        }
    }
    let verdict = if !violations.is_empty() {
        Verdict::Unstable
    } else if min_ratio.is_none() {
        Verdict::Vacuous
    } else {
        Verdict::NoViolationFound
    };
    Ok(ProbeReport {
        min_ratio: min_ratio.map(|(_, r)| r),
        argmin: min_ratio.map(|(i, _)| i),
        reports,
        violations,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn quick() -> Settings {
        Settings {
            starts: 4,
            ..Settings::default()
        }
    }

    #[test]
    fn single_valuation_norms_are_expected_orders() {
        let p2 = catalog::p2_surface();
        let mu = DivisorialMeasure::dirac(p2.valuation("line").unwrap());
        let n = norm(&p2, &p2.class(&[3]), &mu, &quick()).unwrap();
        assert!((n.value - 1.0).abs() < 1e-9);
        assert_eq!(n.maximizers, vec![vec![0.0]]);

        let bl = catalog::blowup_p2_surface();
        let mu = DivisorialMeasure::dirac(bl.valuation("ord_E").unwrap());
        let n = norm(&bl, &bl.class(&[3, -1]), &mu, &quick()).unwrap();
        assert!((n.value - 7.0 / 6.0).abs() < 1e-9);

        let n = norm(&bl, &bl.class(&[3, -1]), &DivisorialMeasure::dirac(Valuation::trivial()), &quick()).unwrap();
        assert_eq!(n.value, 0.0);
    }

    #[test]
    fn two_atom_norm_matches_closed_form() {
        // g(u) = (27 - (3 - u)^3) / 27 - u / 2 on u = t_triv - t_line,
        // maximized at u = 3 - 3 / sqrt(2)
        let p2 = catalog::p2_surface();
        let half = rational::ratio(1, 2);
        let mu = DivisorialMeasure::new(vec![(Valuation::trivial(), half.clone()), (p2.valuation("line").unwrap(), half)]).unwrap();
        let n = norm(&p2, &p2.class(&[3]), &mu, &quick()).unwrap();
        let u = 3.0 - 3.0 / 2f64.sqrt();
        let exact = (27.0 - (3.0 - u).powi(3)) / 27.0 - 0.5 * u;
        assert!((n.value - exact).abs() < 1e-10, "{} vs {exact}", n.value);
        assert!(n.converged);
        assert!((n.maximizers[0][0] - u).abs() < 1e-4);
    }

    #[test]
    fn danskin_examples() {
        let p2 = catalog::p2_surface();
        let l = p2.class(&[3]);
        let mu = DivisorialMeasure::dirac(p2.valuation("line").unwrap());
        let k = p2.canonical_class().clone();
        let left = danskin_derivative(&p2, &l, &mu, &k, Side::Left, &quick()).unwrap();
        assert!((left + 1.0).abs() < 1e-9);
        let along_l = danskin_derivative(&p2, &l, &mu, &l, Side::Right, &quick()).unwrap();
        assert!((along_l - 1.0).abs() < 1e-9);
        let triv = DivisorialMeasure::dirac(Valuation::trivial());
        assert_eq!(danskin_derivative(&p2, &l, &triv, &k, Side::Right, &quick()).unwrap(), 0.0);
    }

    #[test]
    fn beta_examples() {
        let p2 = catalog::p2_surface();
        let r = beta(&p2, &catalog::anticanonical(&p2), &DivisorialMeasure::dirac(p2.valuation("line").unwrap()), &quick()).unwrap();
        assert!(r.beta.abs() < 1e-9);
        let bl = catalog::blowup_p2_surface();
        let r = beta(&bl, &catalog::anticanonical(&bl), &DivisorialMeasure::dirac(bl.valuation("ord_E").unwrap()), &quick()).unwrap();
        assert!((r.beta + 1.0 / 6.0).abs() < 1e-9);
        assert!((r.stability_ratio.unwrap() + 1.0 / 7.0).abs() < 1e-9);
    }

    #[test]
    fn delta_on_the_plane_and_its_blowup() {
        let p2 = catalog::p2_surface();
        let d = delta_anticanonical(&p2, &declared_candidates(&p2), &quick()).unwrap();
        assert!((d.value - 1.0).abs() < 1e-9);
        let bl = catalog::blowup_p2_surface();
        let d = delta_anticanonical(&bl, &declared_candidates(&bl), &quick()).unwrap();
        assert_eq!(d.witness.name, "ord_E");
        assert!((d.value - 6.0 / 7.0).abs() < 1e-9);
        assert!(delta_anticanonical(&bl, &[], &quick()).is_err());
        assert!(delta_anticanonical(&bl, &[Valuation::trivial()], &quick()).is_err());
    }

    #[test]
    fn toric_candidate_lattice() {
        let p2 = catalog::p2_toric();
        let c = toric_candidates(&p2, 1).unwrap();
        assert_eq!(c.len(), 8);
        let d = delta_anticanonical(&p2, &c, &quick()).unwrap();
        assert!((d.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ma_solution_for_trivial_measure() {
        let p2 = catalog::p2_surface();
        let s = ma_solve(&p2, &p2.class(&[3]), &DivisorialMeasure::dirac(Valuation::trivial()), &quick()).unwrap();
        assert_eq!(s.t_star, vec![0.0]);
        assert!(s.residual < 1e-9);
        assert!(s.flat_directions.is_empty());
    }

    #[test]
    fn probe_verdicts() {
        let bl = catalog::blowup_p2_surface();
        let l = catalog::anticanonical(&bl);
        let ms = vec![DivisorialMeasure::dirac(bl.valuation("ord_E").unwrap()), DivisorialMeasure::dirac(bl.valuation("line").unwrap())];
        let r = divisorial_stability_probe(&bl, &l, &ms, 0.0, &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::Unstable);
        assert_eq!(r.violations, vec![0]);
        let r = divisorial_stability_probe(&bl, &l, &[DivisorialMeasure::dirac(Valuation::trivial())], 0.0, &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::Vacuous);
    }
}
