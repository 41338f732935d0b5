//! The shipped shape library: membership, certified interior ball, outer bound and
//! exact Euclidean distance for each constructor.

use std::fmt;
use std::sync::Arc;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{OuterBound, T_MAX};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub};

/// Open halfspace `<normal, x> < offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// `{ x : x^T A x + <b, x> + c < 0 }` with `A` positive definite.
#[derive(Debug, Clone)]
pub struct QuadraticLevelSet {
    matrix: Vec<Vec<f64>>,
    linear: Vec<f64>,
    constant: f64,
    center: Vec<f64>,
    // columns are eigenvectors
    rotation: Vec<Vec<f64>>,
    semiaxes: Vec<f64>,
}

impl QuadraticLevelSet {
    pub fn new(matrix: Vec<Vec<f64>>, linear: Vec<f64>, constant: f64) -> Result<Self> {
        let n = linear.len();
        let spec_err = |message: String| Error::Spec { path: "level_set".into(), message };
        if n == 0 || matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(spec_err("matrix must be square and match the linear term".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 * (1.0 + matrix[i][j].abs()) {
                    return Err(spec_err("matrix must be symmetric".into()));
                }
            }
        }
        let a = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
        let eig = SymmetricEigen::new(a.clone());
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(spec_err("matrix must be positive definite (non-convex or unbounded level set)".into()));
        }
        let b = DVector::from_column_slice(&linear);
        let chol = a.clone().cholesky().ok_or_else(|| spec_err("matrix is not positive definite".into()))?;
        let m = chol.solve(&b) * -0.5;
        let k = m.dot(&(&a * &m)) - constant;
        if !(k > 0.0) {
            return Err(spec_err("level set has empty interior".into()));
        }
        let rotation = (0..n)
            .map(|i| (0..n).map(|j| eig.eigenvectors[(i, j)]).collect())
            .collect();
        let semiaxes = eig.eigenvalues.iter().map(|l| (k / l).sqrt()).collect();
        Ok(Self {
            matrix,
            linear,
            constant,
            center: m.iter().copied().collect(),
            rotation,
            semiaxes,
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let quad: f64 = self.matrix.iter().zip(x).map(|(row, xi)| xi * dot(row, x)).sum();
        quad + dot(&self.linear, x) + self.constant
    }

    /// Coordinates of `x - center` in the eigenbasis.
    fn principal(&self, x: &[f64]) -> Vec<f64> {
        let d = sub(x, &self.center);
        let n = d.len();
        (0..n).map(|j| (0..n).map(|i| self.rotation[i][j] * d[i]).sum()).collect()
    }
}

/// User-supplied membership oracle with its own certificates.
#[derive(Clone)]
pub struct CustomMembership {
    pub id: String,
    pub dim: usize,
    pub membership: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
    pub interior_point: Vec<f64>,
    pub margin: f64,
    pub outer: OuterBound,
}

impl fmt::Debug for CustomMembership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Custom({})", self.id)
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    Ball { dim: usize, radius: f64 },
    Ellipsoid { semiaxes: Vec<f64> },
    Halfspace(Face),
    /// Faces are stored with unit normals.
    Polytope { faces: Vec<Face> },
    /// `{ x : x with coordinate `axis` removed lies in base }`.
    Cylinder { base: Box<Shape>, axis: usize },
    Translate { inner: Box<Shape>, shift: Vec<f64> },
    /// `factor * inner`
    Dilate { inner: Box<Shape>, factor: f64 },
    LevelSet(QuadraticLevelSet),
    Custom(CustomMembership),
}

fn drop_axis(x: &[f64], axis: usize) -> Vec<f64> {
    x.iter().enumerate().filter(|(i, _)| *i != axis).map(|(_, v)| *v).collect()
}

fn insert_axis(x: &[f64], axis: usize, v: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    out.insert(axis, v);
    out
}

impl Shape {
    pub fn tag(&self) -> &'static str {
        match self {
            Shape::Ball { .. } => "ball",
            Shape::Ellipsoid { .. } => "ellipsoid",
            Shape::Halfspace(_) => "halfspace",
            Shape::Polytope { .. } => "polytope",
            Shape::Cylinder { .. } => "cylinder",
            Shape::Translate { .. } => "translate",
            Shape::Dilate { .. } => "dilate",
            Shape::LevelSet(_) => "level_set",
            Shape::Custom(_) => "custom",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Ball { dim, .. } => *dim,
            Shape::Ellipsoid { semiaxes } => semiaxes.len(),
            Shape::Halfspace(f) => f.normal.len(),
            Shape::Polytope { faces } => faces.first().map_or(0, |f| f.normal.len()),
            Shape::Cylinder { base, .. } => base.dim() + 1,
            Shape::Translate { shift, .. } => shift.len(),
            Shape::Dilate { inner, .. } => inner.dim(),
            Shape::LevelSet(q) => q.linear.len(),
            Shape::Custom(c) => c.dim,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Shape::Ball { radius, .. } => dot(x, x) < radius * radius,
            Shape::Ellipsoid { semiaxes } => {
                x.iter().zip(semiaxes).map(|(v, a)| (v / a) * (v / a)).sum::<f64>() < 1.0
            }
            Shape::Halfspace(f) => dot(&f.normal, x) < f.offset,
            Shape::Polytope { faces } => faces.iter().all(|f| dot(&f.normal, x) < f.offset),
            Shape::Cylinder { base, axis } => base.contains(&drop_axis(x, *axis)),
            Shape::Translate { inner, shift } => inner.contains(&sub(x, shift)),
            Shape::Dilate { inner, factor } => {
                let y: Vec<f64> = x.iter().map(|v| v / factor).collect();
                inner.contains(&y)
            }
            Shape::LevelSet(q) => q.evaluate(x) < 0.0,
            Shape::Custom(c) => (c.membership)(x),
        }
    }

    /// Certified interior point and radius of an open ball around it inside the shape.
    pub fn interior(&self) -> Result<(Vec<f64>, f64)> {
        Ok(match self {
            Shape::Ball { dim, radius } => (vec![0.0; *dim], *radius),
            Shape::Ellipsoid { semiaxes } => {
                (vec![0.0; semiaxes.len()], semiaxes.iter().copied().fold(f64::INFINITY, f64::min))
            }
            Shape::Halfspace(f) => {
                // unit normal
                if f.offset > 0.0 {
                    (vec![0.0; f.normal.len()], f.offset)
                } else {
                    (f.normal.iter().map(|a| a * (f.offset - 1.0)).collect(), 1.0)
                }
            }
            Shape::Polytope { faces } => polytope_interior(faces)?,
            Shape::Cylinder { base, axis } => {
                let (c, r) = base.interior()?;
                (insert_axis(&c, *axis, 0.0), r)
            }
            Shape::Translate { inner, shift } => {
                let (c, r) = inner.interior()?;
                (c.iter().zip(shift).map(|(a, b)| a + b).collect(), r)
            }
            Shape::Dilate { inner, factor } => {
                let (c, r) = inner.interior()?;
                (c.iter().map(|v| v * factor).collect(), r * factor)
            }
            Shape::LevelSet(q) => {
                (q.center.clone(), q.semiaxes.iter().copied().fold(f64::INFINITY, f64::min))
            }
            Shape::Custom(c) => (c.interior_point.clone(), c.margin),
        })
    }

    pub fn outer(&self) -> OuterBound {
        match self {
            Shape::Ball { radius, .. } => OuterBound::Radius(*radius),
            Shape::Ellipsoid { semiaxes } => OuterBound::Radius(semiaxes.iter().copied().fold(0.0, f64::max)),
            Shape::Halfspace(_) | Shape::Polytope { .. } | Shape::Cylinder { .. } => OuterBound::Unbounded { reach: T_MAX },
            Shape::Translate { inner, shift } => match inner.outer() {
                OuterBound::Radius(r) => OuterBound::Radius(r + norm(shift)),
                u => u,
            },
            Shape::Dilate { inner, factor } => match inner.outer() {
                OuterBound::Radius(r) => OuterBound::Radius(r * factor),
                u => u,
            },
            Shape::LevelSet(q) => {
                OuterBound::Radius(norm(&q.center) + q.semiaxes.iter().copied().fold(0.0, f64::max))
            }
            Shape::Custom(c) => c.outer,
        }
    }

    /// Exact Euclidean distance from `x` to the shape when it is below `cap`;
    /// `Ok(None)` when it is at least `cap`. Points inside are at distance zero.
    pub fn distance_within(&self, x: &[f64], cap: f64) -> Result<Option<f64>> {
        let capped = |d: f64| if d < cap { Some(d.max(0.0)) } else { None };
        Ok(match self {
            Shape::Ball { radius, .. } => capped(norm(x) - radius),
            Shape::Ellipsoid { semiaxes } => ellipsoid_distance(semiaxes, x, cap),
            Shape::Halfspace(f) => capped(dot(&f.normal, x) - f.offset),
            Shape::Polytope { faces } => polytope_distance(faces, x, cap),
            Shape::Cylinder { base, axis } => base.distance_within(&drop_axis(x, *axis), cap)?,
            Shape::Translate { inner, shift } => inner.distance_within(&sub(x, shift), cap)?,
            Shape::Dilate { inner, factor } => {
                let y: Vec<f64> = x.iter().map(|v| v / factor).collect();
                inner.distance_within(&y, cap / factor)?.map(|d| d * factor)
            }
            Shape::LevelSet(q) => ellipsoid_distance(&q.semiaxes, &q.principal(x), cap),
            Shape::Custom(c) => {
                return Err(Error::Unsupported(format!("no distance function for custom body `{}`", c.id)))
            }
        })
    }
}

fn ellipsoid_distance(semiaxes: &[f64], x: &[f64], cap: f64) -> Option<f64> {
    let s: f64 = x.iter().zip(semiaxes).map(|(v, a)| (v / a) * (v / a)).sum();
    if s <= 1.0 {
        return Some(0.0);
    }
    let a_min = semiaxes.iter().copied().fold(f64::INFINITY, f64::min);
    let a_max = semiaxes.iter().copied().fold(0.0, f64::max);
    // x lies on the boundary of sqrt(s) E, which contains E + (sqrt(s) - 1) a_min B
    if (s.sqrt() - 1.0) * a_min >= cap {
        return None;
    }
    // nearest point z_i = a_i^2 x_i / (a_i^2 + t), with t the root of phi
    let phi = |t: f64| {
        x.iter()
            .zip(semiaxes)
            .map(|(v, a)| {
                let q = a * v / (a * a + t);
                q * q
            })
            .sum::<f64>()
            - 1.0
    };
    let (mut lo, mut hi) = (0.0_f64, a_max * norm(x));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let d = x
        .iter()
        .zip(semiaxes)
        .map(|(v, a)| {
            let diff = v - a * a * v / (a * a + t);
            diff * diff
        })
        .sum::<f64>()
        .sqrt();
    (d < cap).then_some(d)
}

/// Exact projection distance onto `{ <n_i, x> <= d_i }` (unit normals) by active-set
/// enumeration. Only faces within `cap` of `x` can be active at a projection closer
/// than `cap`, which keeps the enumeration small.
fn polytope_distance(faces: &[Face], x: &[f64], cap: f64) -> Option<f64> {
    let viol: Vec<f64> = faces.iter().map(|f| dot(&f.normal, x) - f.offset).collect();
    let max_v = viol.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max_v <= 0.0 {
        return Some(0.0);
    }
    if max_v >= cap {
        return None;
    }
    let cand: Vec<usize> = (0..faces.len()).filter(|&i| viol[i] > -cap).collect();
    let n = x.len();
    let max_k = n.min(cand.len());
    let mut subset = Vec::with_capacity(max_k);
    for k in 1..=max_k {
        if let Some(d) = search_subsets(faces, x, &viol, &cand, k, 0, &mut subset) {
            return (d < cap).then_some(d);
        }
    }
    None
}

fn search_subsets(
    faces: &[Face],
    x: &[f64],
    viol: &[f64],
    cand: &[usize],
    k: usize,
    start: usize,
    subset: &mut Vec<usize>,
) -> Option<f64> {
    if subset.len() == k {
        return kkt_projection(faces, x, viol, subset);
    }
    for idx in start..cand.len() {
        subset.push(cand[idx]);
        let found = search_subsets(faces, x, viol, cand, k, idx + 1, subset);
        subset.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

fn kkt_projection(faces: &[Face], x: &[f64], viol: &[f64], active: &[usize]) -> Option<f64> {
    let gram: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| active.iter().map(|&j| dot(&faces[i].normal, &faces[j].normal)).collect())
        .collect();
    let rhs: Vec<f64> = active.iter().map(|&i| viol[i]).collect();
    let lambda = crate::linalg::solve_dense(gram, rhs)?;
    if lambda.iter().any(|&l| l < -1e-12) {
        return None;
    }
    let mut step = vec![0.0; x.len()];
    for (l, &i) in lambda.iter().zip(active) {
        crate::linalg::axpy_into(&mut step, *l, &faces[i].normal);
    }
    let z = sub(x, &step);
    let feasible = faces.iter().all(|f| dot(&f.normal, &z) <= f.offset + 1e-10);
    feasible.then(|| norm(&step))
}

fn polytope_interior(faces: &[Face]) -> Result<(Vec<f64>, f64)> {
    let n = faces[0].normal.len();
    if faces.iter().all(|f| f.offset > 0.0) {
        let r = faces.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min);
        return Ok((vec![0.0; n], r));
    }
    // Chebyshev center: max r s.t. <n_i, x> + r <= d_i, inside a T_MAX box.
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let xs: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (-T_MAX, T_MAX))).collect();
    let r = lp.add_var(1.0, (0.0, T_MAX));
    for f in faces {
        let mut row: Vec<_> = xs.iter().zip(&f.normal).map(|(v, a)| (*v, *a)).collect();
        row.push((r, 1.0));
        lp.add_constraint(&row, ComparisonOp::Le, f.offset);
    }
    let sol = lp.solve().map_err(|e| Error::Spec {
        path: "faces".into(),
        message: format!("polytope is empty ({e})"),
    })?;
    let radius = sol[r];
    if !(radius > 1e-9) {
        return Err(Error::Spec { path: "faces".into(), message: "polytope has empty interior".into() });
    }
    Ok((xs.iter().map(|v| sol[*v]).collect(), radius))
}
