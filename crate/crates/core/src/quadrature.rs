//! Composite Gauss–Legendre quadrature with adaptive bisection.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point rule on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

// exact through degree 5, which covers volume pieces up to threefolds
const ORDER: usize = 3;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<f64> {
    let (x, w) = rule();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        s += wi * f(mid + half * xi)?;
    }
    Ok(s * half)
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveSettings {
    /// Absolute tolerance on the whole integral.
    pub tolerance: f64,
    pub max_depth: u32,
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_depth: 40,
        }
    }
}

/// Integrates `f` over `[lo, hi]`, splitting first at the given breakpoints,
/// then bisecting each panel until a panel and its two halves agree to a
/// share of the tolerance proportional to its length.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, breakpoints: &[f64], settings: AdaptiveSettings) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(hi > lo) {
        return Ok(0.0);
    }
    let mut pts: Vec<f64> = breakpoints.iter().copied().filter(|p| *p > lo && *p < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let width = hi - lo;
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let whole = panel(&mut f, a, b)?;
        total += refine(&mut f, a, b, whole, settings.tolerance * (b - a) / width, settings.max_depth, settings.tolerance)?;
    }
    Ok(total)
}

fn refine<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    global_tol: f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = panel(f, a, m)?;
    let right = panel(f, m, b)?;
    let halves = left + right;
    // floor keeps tiny panels from chasing rounding noise
    if (halves - whole).abs() <= tol.max(1e-15 * halves.abs()) || m <= a || m >= b {
        return Ok(halves);
    }
    if depth == 0 {
        return Err(Error::Quadrature {
            tolerance: global_tol,
            lo: a,
            hi: b,
        });
    }
    Ok(refine(f, a, m, left, 0.5 * tol, depth - 1, global_tol)? + refine(f, m, b, right, 0.5 * tol, depth - 1, global_tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-14);
        let (_, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_on_polynomials() {
        let v = integrate(|x| Ok((3.0 - x) * (3.0 - x)), 0.0, 3.0, &[], AdaptiveSettings::default()).unwrap();
        assert!((v - 9.0).abs() < 1e-13);
        let v = integrate(|x| Ok(x.powi(5)), 0.0, 1.0, &[], AdaptiveSettings::default()).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        let v = integrate(|x| Ok(x.powi(11)), 0.0, 1.0, &[], AdaptiveSettings::default()).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-9);
    }

    #[test]
    fn kinks_resolved_by_breakpoints_or_bisection() {
        let f = |x: f64| Ok(if x < 1.0 { 9.0 - x * x } else { 8.0 * (2.0 - x).max(0.0) });
        let with = integrate(f, 0.0, 3.0, &[1.0, 2.0], AdaptiveSettings::default()).unwrap();
        let without = integrate(f, 0.0, 3.0, &[], AdaptiveSettings { tolerance: 1e-11, max_depth: 60 }).unwrap();
        let exact = 9.0 - 1.0 / 3.0 + 4.0;
        assert!((with - exact).abs() < 1e-12);
        assert!((without - exact).abs() < 1e-10);
    }

    #[test]
    fn reports_failure_when_depth_exhausted() {
        let r = integrate(|x| Ok((1.0 / x).sin()), 1e-9, 1.0, &[], AdaptiveSettings { tolerance: 1e-14, max_depth: 3 });
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
