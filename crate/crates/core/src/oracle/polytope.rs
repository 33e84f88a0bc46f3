use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{Signed, Zero};

use crate::domain::HalfspacePolytope;
use crate::error::{Error, Result};
use crate::rational::{dot, factorial_int, Rational};

pub const DEFAULT_DIM_CAP: usize = 6;

/// V-representation; vertices are distinct and each is extreme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexPolytope {
    pub dim: usize,
    pub vertices: Vec<Vec<Rational>>,
}

/// Solves a square system exactly; `None` if singular.
fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let m = b.len();
    for k in 0..m {
        let piv = (k..m).find(|&i| !a[i][k].is_zero())?;
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..m {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &a[k][k];
            for j in k..m {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
            let v = &f * &b[k];
            b[i] -= v;
        }
    }
    let mut x = vec![Rational::zero(); m];
    for k in (0..m).rev() {
        let s = (k + 1..m).fold(b[k].clone(), |acc, j| acc - &a[k][j] * &x[j]);
        x[k] = s / &a[k][k];
    }
    Some(x)
}

/// Rank of a list of vectors by exact elimination.
fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let f = &rows[i][c] / &rows[r][c];
            for j in c..cols {
                let v = &f * &rows[r][j];
                rows[i][j] -= v;
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// One-dimensional null space of `dim - 1` independent rows, if it exists.
fn null_direction(rows: &[&Vec<Rational>], dim: usize) -> Option<Vec<Rational>> {
    // Fix one free coordinate to 1 and solve for the rest.
    for free in 0..dim {
        let a: Vec<Vec<Rational>> =
            rows.iter().map(|r| (0..dim).filter(|&j| j != free).map(|j| r[j].clone()).collect()).collect();
        let b: Vec<Rational> = rows.iter().map(|r| -r[free].clone()).collect();
        if let Some(sol) = solve(a, b) {
            let mut d = Vec::with_capacity(dim);
            let mut it = sol.into_iter();
            for j in 0..dim {
                d.push(if j == free { Rational::from_integer(1.into()) } else { it.next().expect("dim - 1 entries") });
            }
            return Some(d);
        }
    }
    None
}

fn check_bounded(poly: &HalfspacePolytope) -> Result<()> {
    let d = poly.dim;
    let normals: Vec<&Vec<Rational>> = poly.rows.iter().map(|r| &r.coeffs).filter(|c| c.iter().any(|v| !v.is_zero())).collect();
    if rank(normals.iter().map(|c| (*c).clone()).collect()) < d {
        return Err(Error::Unbounded("constraint normals do not span the space".into()));
    }
    if d == 1 {
        let pos = normals.iter().any(|c| c[0].is_positive());
        let neg = normals.iter().any(|c| c[0].is_negative());
        return if pos && neg { Ok(()) } else { Err(Error::Unbounded("half-line".into())) };
    }
    // A non-trivial pointed recession cone has an extreme ray cut out by d-1 rows.
    for subset in normals.iter().copied().combinations(d - 1) {
        if rank(subset.iter().map(|c| (*c).clone()).collect()) < d - 1 {
            continue;
        }
        let Some(ray) = null_direction(&subset, d) else { continue };
        for dir in [ray.clone(), ray.iter().map(|v| -v).collect::<Vec<_>>()] {
            if normals.iter().all(|c| !dot(c, &dir).is_positive()) {
                return Err(Error::Unbounded("recession cone contains a ray".into()));
            }
        }
    }
    Ok(())
}

/// Vertices by intersecting every `dim`-subset of facet hyperplanes.
pub fn vertices(poly: &HalfspacePolytope) -> Result<VertexPolytope> {
    let d = poly.dim;
    if d == 0 {
        let feasible = poly.rows.iter().all(|r| !r.rhs.is_negative());
        return Ok(VertexPolytope { dim: 0, vertices: if feasible { vec![vec![]] } else { vec![] } });
    }
    check_bounded(poly)?;
    let rows: Vec<_> = poly.rows.iter().filter(|r| r.coeffs.iter().any(|v| !v.is_zero())).collect();
    let mut seen = BTreeSet::new();
    let mut verts = Vec::new();
    for subset in rows.iter().combinations(d) {
        let a: Vec<Vec<Rational>> = subset.iter().map(|r| r.coeffs.clone()).collect();
        let b: Vec<Rational> = subset.iter().map(|r| r.rhs.clone()).collect();
        let Some(x) = solve(a, b) else { continue };
        if poly.contains(&x) && seen.insert(x.clone()) {
            verts.push(x);
        }
    }
    Ok(VertexPolytope { dim: d, vertices: verts })
}

/// Affine dimension of a point set.
fn affine_dim(points: &[&Vec<Rational>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = points[0];
    rank(points[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect())
}

fn centroid(points: &[&Vec<Rational>]) -> Vec<Rational> {
    let k = Rational::from_integer((points.len() as i64).into());
    let d = points[0].len();
    (0..d).map(|j| points.iter().fold(Rational::zero(), |a, p| a + &p[j]) / &k).collect()
}

fn det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut sign = Rational::from_integer(1.into());
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else { return Rational::zero() };
        if p != k {
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &m[k][k];
            for j in k..n {
                let v = &f * &m[k][j];
                m[i][j] -= v;
            }
        }
    }
    (0..n).fold(sign, |a, i| a * &m[i][i])
}

/// Exact volume with the default dimension cap.
pub fn exact_volume(poly: &HalfspacePolytope) -> Result<Rational> {
    exact_volume_with_cap(poly, DEFAULT_DIM_CAP)
}

/// Exact Lebesgue volume. The polytope is split into simplices
/// `conv(c_P, c_F(d-1), ..., c_F(0))` over complete flags of faces, where
/// `c_F` is the vertex centroid of face `F`.
pub fn exact_volume_with_cap(poly: &HalfspacePolytope, cap: usize) -> Result<Rational> {
    if poly.dim > cap {
        return Err(Error::DimCap { dim: poly.dim, cap });
    }
    let vp = vertices(poly)?;
    if vp.vertices.is_empty() {
        return Ok(Rational::zero());
    }
    let d = poly.dim;
    if d == 0 {
        return Ok(Rational::from_integer(1.into()));
    }
    let all: Vec<&Vec<Rational>> = vp.vertices.iter().collect();
    if affine_dim(&all) < d {
        return Ok(Rational::zero());
    }
    // Tight rows per vertex, as a bitset over row indices.
    let rows: Vec<_> = poly.rows.iter().filter(|r| r.coeffs.iter().any(|v| !v.is_zero())).collect();
    let tight: Vec<Vec<bool>> =
        vp.vertices.iter().map(|v| rows.iter().map(|r| dot(&r.coeffs, v) == r.rhs).collect()).collect();
    let top: Vec<usize> = (0..vp.vertices.len()).collect();
    let apex = centroid(&all);
    let mut total = Rational::zero();
    let mut chain = Vec::new();
    flags(&vp.vertices, &tight, rows.len(), &top, d, &apex, &mut chain, &mut total);
    Ok(total / Rational::from_integer(factorial_int(d as u32)))
}

/// Proper faces of dimension `k - 1` of the face with vertex set `face` (dimension `k`).
fn facets_of(verts: &[Vec<Rational>], tight: &[Vec<bool>], nrows: usize, face: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
    for r in 0..nrows {
        if face.iter().all(|&v| tight[v][r]) {
            continue;
        }
        let sub: Vec<usize> = face.iter().copied().filter(|&v| tight[v][r]).collect();
        if sub.is_empty() {
            continue;
        }
        let pts: Vec<&Vec<Rational>> = sub.iter().map(|&i| &verts[i]).collect();
        if affine_dim(&pts) + 1 == k {
            out.insert(sub);
        }
    }
    out.into_iter().collect()
}

#[allow(clippy::too_many_arguments)]
fn flags(
    verts: &[Vec<Rational>],
    tight: &[Vec<bool>],
    nrows: usize,
    face: &[usize],
    k: usize,
    apex: &[Rational],
    chain: &mut Vec<Vec<Rational>>,
    total: &mut Rational,
) {
    if k == 0 {
        let m: Vec<Vec<Rational>> = chain.iter().map(|c| c.iter().zip(apex).map(|(a, b)| a - b).collect()).collect();
        *total += det(m).abs();
        return;
    }
    for sub in facets_of(verts, tight, nrows, face, k) {
        let pts: Vec<&Vec<Rational>> = sub.iter().map(|&i| &verts[i]).collect();
        chain.push(centroid(&pts));
        flags(verts, tight, nrows, &sub, k - 1, apex, chain, total);
        chain.pop();
    }
}
