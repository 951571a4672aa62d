//! H-described convex polytopes: vertex enumeration, exact triangulation,
//! normalized volume and lattice points.

use std::collections::BTreeSet;

use crate::linalg::{self, Matrix, Scalar};

/// `normal . m >= offset`
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace<S> {
    pub normal: Vec<S>,
    pub offset: S,
}

impl<S: Scalar> HalfSpace<S> {
    pub fn new(normal: Vec<S>, offset: S) -> Self {
        Self { normal, offset }
    }

    fn slack(&self, m: &[S]) -> S {
        linalg::dot(&self.normal, m) - self.offset.clone()
    }
}

#[derive(Clone, Debug)]
pub struct Polytope<S> {
    dim: usize,
    halfspaces: Vec<HalfSpace<S>>,
    vertices: Vec<Vec<S>>,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

pub(crate) fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    subsets(n, k)
}

fn same_point<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x.clone() - y.clone()).negligible())
}

impl<S: Scalar> Polytope<S> {
    /// Enumerates vertices by intersecting every `dim`-subset of facet
    /// hyperplanes. Boundedness is the caller's responsibility.
    pub fn new(dim: usize, halfspaces: Vec<HalfSpace<S>>) -> Self {
        let mut vertices: Vec<Vec<S>> = Vec::new();
        for idx in subsets(halfspaces.len(), dim) {
            let a: Matrix<S> = idx.iter().map(|&i| halfspaces[i].normal.clone()).collect();
            let b: Vec<S> = idx.iter().map(|&i| halfspaces[i].offset.clone()).collect();
            let Some(p) = linalg::solve(&a, &b) else { continue };
            if halfspaces.iter().any(|h| h.slack(&p).is_neg()) {
                continue;
            }
            if !vertices.iter().any(|v| same_point(v, &p)) {
                vertices.push(p);
            }
        }
        Self {
            dim,
            halfspaces,
            vertices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<S>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[HalfSpace<S>] {
        &self.halfspaces
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn affine_dim(&self, idx: &[usize]) -> usize {
        if idx.len() <= 1 {
            return 0;
        }
        let base = &self.vertices[idx[0]];
        let rows: Matrix<S> = idx[1..]
            .iter()
            .map(|&i| {
                self.vertices[i]
                    .iter()
                    .zip(base)
                    .map(|(a, b)| a.clone() - b.clone())
                    .collect()
            })
            .collect();
        linalg::rank(&rows)
    }

    fn tight(&self, h: usize, v: usize) -> bool {
        self.halfspaces[h].slack(&self.vertices[v]).negligible()
    }

    /// Pulling triangulation: cone the first vertex of each face over the
    /// facets of that face not containing it. Returns vertex index tuples of
    /// full-dimensional simplices.
    pub fn triangulate(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        if all.is_empty() || self.affine_dim(&all) < self.dim {
            return Vec::new();
        }
        let mut out = Vec::new();
        self.pull(&all, self.dim, &mut Vec::new(), &mut out);
        out
    }

    fn pull(&self, face: &[usize], d: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let apex = face[0];
        if d == 0 {
            let mut s = prefix.clone();
            s.push(apex);
            out.push(s);
            return;
        }
        let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
        for h in 0..self.halfspaces.len() {
            if self.tight(h, apex) {
                continue;
            }
            let sub: Vec<usize> = face.iter().copied().filter(|&v| self.tight(h, v)).collect();
            if sub.len() >= d && self.affine_dim(&sub) == d - 1 {
                facets.insert(sub);
            }
        }
        prefix.push(apex);
        for f in facets {
            self.pull(&f, d - 1, prefix, out);
        }
        prefix.pop();
    }

    /// `dim! * vol`, i.e. the sum of `|det|` over a triangulation.
    pub fn normalized_volume(&self) -> S {
        let mut total = S::zero();
        for simplex in self.triangulate() {
            let base = &self.vertices[simplex[0]];
            let m: Matrix<S> = simplex[1..]
                .iter()
                .map(|&i| {
                    self.vertices[i]
                        .iter()
                        .zip(base)
                        .map(|(a, b)| a.clone() - b.clone())
                        .collect()
                })
                .collect();
            total = total + linalg::determinant(&m).magnitude();
        }
        total
    }

    /// Minimum and maximum of a linear form over the vertices.
    pub fn linear_range(&self, w: &[S]) -> Option<(S, S)> {
        let mut it = self.vertices.iter().map(|v| linalg::dot(v, w));
        let first = it.next()?;
        Some(it.fold((first.clone(), first), |(lo, hi), x| {
            let lo = if x < lo { x.clone() } else { lo };
            let hi = if x > hi { x } else { hi };
            (lo, hi)
        }))
    }
}

impl Polytope<f64> {
    /// Twice the area of a polygon cut by extra half-planes, by clipping the
    /// ordered vertex cycle. Much cheaper than re-enumerating vertices.
    pub fn clipped_normalized_area(&self, cuts: &[HalfSpace<f64>]) -> f64 {
        assert_eq!(self.dim, 2, "clipping is planar only");
        if self.vertices.len() < 3 {
            return 0.0;
        }
        let n = self.vertices.len() as f64;
        let cx = self.vertices.iter().map(|v| v[0]).sum::<f64>() / n;
        let cy = self.vertices.iter().map(|v| v[1]).sum::<f64>() / n;
        let mut poly: Vec<[f64; 2]> = self.vertices.iter().map(|v| [v[0], v[1]]).collect();
        poly.sort_by(|a, b| (a[1] - cy).atan2(a[0] - cx).total_cmp(&(b[1] - cy).atan2(b[0] - cx)));
        for h in cuts {
            if poly.is_empty() {
                break;
            }
            let side = |p: &[f64; 2]| h.normal[0] * p[0] + h.normal[1] * p[1] - h.offset;
            let mut next = Vec::with_capacity(poly.len() + 1);
            for i in 0..poly.len() {
                let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
                let (sp, sq) = (side(&p), side(&q));
                if sp >= 0.0 {
                    next.push(p);
                }
                if (sp >= 0.0) != (sq >= 0.0) {
                    let r = sp / (sp - sq);
                    next.push([p[0] + r * (q[0] - p[0]), p[1] + r * (q[1] - p[1])]);
                }
            }
            poly = next;
        }
        let mut twice = 0.0;
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            twice += p[0] * q[1] - p[1] * q[0];
        }
        twice.abs()
    }
}

/// Whether `{m : A m >= b}` is bounded for every `b`: the only solution of
/// `A d >= 0` is `d = 0`.
pub fn normals_bound_every_polytope<S: Scalar>(normals: &[Vec<S>], dim: usize) -> bool {
    if linalg::rank(&normals.to_vec()) < dim {
        return false;
    }
    if dim == 1 {
        let pos = normals.iter().any(|n| n[0].is_pos());
        let neg = normals.iter().any(|n| n[0].is_neg());
        return pos && neg;
    }
    // extreme rays of the recession cone lie on dim-1 independent walls
    for idx in subsets(normals.len(), dim - 1) {
        let rows: Matrix<S> = idx.iter().map(|&i| normals[i].clone()).collect();
        let Some(d) = linalg::kernel_line(&rows, dim) else { continue };
        for sign in [1i64, -1] {
            let d: Vec<S> = d.iter().map(|x| x.clone() * S::from_i64(sign)).collect();
            if normals.iter().all(|n| !linalg::dot(n, &d).is_neg()) {
                return false;
            }
        }
    }
    true
}

/// Integer points of a polytope with integer normals, scanning the bounding box.
pub fn lattice_points(normals: &[Vec<i64>], offsets: &[i64], lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let dim = lo.len();
    let mut out = Vec::new();
    let mut cur = lo.to_vec();
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return out;
    }
    loop {
        if normals
            .iter()
            .zip(offsets)
            .all(|(n, &b)| n.iter().zip(&cur).map(|(x, y)| x * y).sum::<i64>() >= b)
        {
            out.push(cur.clone());
        }
        let mut k = 0;
        loop {
            if k == dim {
                return out;
            }
            cur[k] += 1;
            if cur[k] <= hi[k] {
                break;
            }
            cur[k] = lo[k];
            k += 1;
        }
    }
}
