//! Small dense linear algebra over exact rationals or floats.
//!
//! Everything here is written against [`Scalar`] so the same elimination code
//! backs the exact intersection-theory path and the floating-point path used
//! inside integrals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{Signed, Zero};

use crate::rational::Rational;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// Zero test; exact for rationals, tolerance-based for floats.
    fn negligible(&self) -> bool;
    fn from_rational(r: &Rational) -> Self;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn magnitude(&self) -> Self;

    fn is_pos(&self) -> bool {
        !self.negligible() && *self > Self::zero()
    }
    fn is_neg(&self) -> bool {
        !self.negligible() && *self < Self::zero()
    }
}

/// Absolute tolerance for the floating-point path.
pub const FLOAT_EPS: f64 = 1e-11;

impl Scalar for f64 {
    fn negligible(&self) -> bool {
        self.abs() <= FLOAT_EPS
    }
    fn from_rational(r: &Rational) -> Self {
        crate::rational::to_f64(r)
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
}

impl Scalar for Rational {
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_i64(n: i64) -> Self {
        crate::rational::int(n)
    }
    fn to_f64(&self) -> f64 {
        crate::rational::to_f64(self)
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
}

pub type Matrix<S> = Vec<Vec<S>>;

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn mat_vec<S: Scalar>(m: &Matrix<S>, v: &[S]) -> Vec<S> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn pivot_row<S: Scalar>(a: &Matrix<S>, col: usize, from: usize) -> Option<usize> {
    let mut best: Option<(usize, S)> = None;
    for (r, row) in a.iter().enumerate().skip(from) {
        let m = row[col].magnitude();
        if m.negligible() {
            continue;
        }
        match &best {
            Some((_, b)) if *b >= m => {}
            _ => best = Some((r, m)),
        }
    }
    best.map(|(r, _)| r)
}

/// Solves the square system `a x = b`; `None` when singular.
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Option<Vec<S>> {
    let n = b.len();
    let mut m: Matrix<S> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = pivot_row(&m, col, col)?;
        m.swap(col, p);
        let piv = m[col][col].clone();
        for r in 0..n {
            if r == col || m[r][col].negligible() {
                continue;
            }
            let f = m[r][col].clone() / piv.clone();
            for c in col..=n {
                let v = m[col][c].clone() * f.clone();
                m[r][c] = m[r][c].clone() - v;
            }
        }
    }
    Some((0..n).map(|i| m[i][n].clone() / m[i][i].clone()).collect())
}

pub fn rank<S: Scalar>(rows: &Matrix<S>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m = rows.clone();
    let cols = m[0].len();
    let mut r = 0;
    for col in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = pivot_row(&m, col, r) else { continue };
        m.swap(r, p);
        let piv = m[r][col].clone();
        for i in r + 1..m.len() {
            if m[i][col].negligible() {
                continue;
            }
            let f = m[i][col].clone() / piv.clone();
            for c in col..cols {
                let v = m[r][c].clone() * f.clone();
                m[i][c] = m[i][c].clone() - v;
            }
        }
        r += 1;
    }
    r
}

pub fn determinant<S: Scalar>(a: &Matrix<S>) -> S {
    let n = a.len();
    let mut m = a.clone();
    let mut det = S::from_i64(1);
    for col in 0..n {
        let Some(p) = pivot_row(&m, col, col) else {
            return S::zero();
        };
        if p != col {
            m.swap(col, p);
            det = -det;
        }
        let piv = m[col][col].clone();
        det = det * piv.clone();
        for r in col + 1..n {
            if m[r][col].negligible() {
                continue;
            }
            let f = m[r][col].clone() / piv.clone();
            for c in col..n {
                let v = m[col][c].clone() * f.clone();
                m[r][c] = m[r][c].clone() - v;
            }
        }
    }
    det
}

/// A basis vector of the kernel when the matrix has corank exactly one.
pub fn kernel_line<S: Scalar>(rows: &Matrix<S>, cols: usize) -> Option<Vec<S>> {
    if rows.is_empty() {
        return if cols == 1 { Some(vec![S::from_i64(1)]) } else { None };
    }
    let mut m = rows.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = pivot_row(&m, col, r) else { continue };
        m.swap(r, p);
        let piv = m[r][col].clone();
        for c in col..cols {
            m[r][c] = m[r][c].clone() / piv.clone();
        }
        for i in 0..m.len() {
            if i == r || m[i][col].negligible() {
                continue;
            }
            let f = m[i][col].clone();
            for c in col..cols {
                let v = m[r][c].clone() * f.clone();
                m[i][c] = m[i][c].clone() - v;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if pivots.len() + 1 != cols {
        return None;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![S::zero(); cols];
    v[free] = S::from_i64(1);
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[row][free].clone();
    }
    Some(v)
}

/// Counts (positive, negative, zero) eigenvalue signs of a symmetric matrix
/// via congruence diagonalization.
pub fn inertia<S: Scalar>(sym: &Matrix<S>) -> (usize, usize, usize) {
    let n = sym.len();
    let mut a = sym.clone();
    let (mut pos, mut neg) = (0, 0);
    let mut k = 0;
    while k < n {
        if a[k][k].negligible() {
            if let Some(i) = (k + 1..n).find(|&i| !a[i][i].negligible()) {
                a.swap(k, i);
                for row in a.iter_mut() {
                    row.swap(k, i);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].negligible()) {
                // replace e_k by e_k + e_j: diagonal becomes 2 a_kj + a_jj
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] = a[k][c].clone() + v;
                }
                for row in a.iter_mut() {
                    let v = row[j].clone();
                    row[k] = row[k].clone() + v;
                }
            } else {
                k += 1;
                continue;
            }
        }
        let piv = a[k][k].clone();
        if piv.negligible() {
            k += 1;
            continue;
        }
        if piv > S::zero() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            let f = a[i][k].clone() / piv.clone();
            for c in k..n {
                let v = a[k][c].clone() * f.clone();
                a[i][c] = a[i][c].clone() - v;
            }
        }
        for row in a.iter_mut().skip(k + 1) {
            row[k] = S::zero();
        }
        for c in k + 1..n {
            a[k][c] = S::zero();
        }
        k += 1;
    }
    (pos, neg, n - pos - neg)
}

pub fn is_negative_definite<S: Scalar>(sym: &Matrix<S>) -> bool {
    let (_, neg, _) = inertia(sym);
    neg == sym.len()
}
