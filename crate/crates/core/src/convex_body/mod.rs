//! Open convex sets given by membership oracles.
//!
//! A [`ConvexBody`] carries a certified interior point `x0` with a margin `r0` (the
//! open ball `B(x0, r0)` lies inside) and an outer bound. The Minkowski functional is
//! taken with respect to `x0`, `p(x) = inf { l > 0 : x0 + (x - x0) / l in body }`,
//! so it coincides with the usual gauge whenever `x0 = 0`. Gaussian integrals are
//! always computed in the original coordinates.

mod shape;
mod spec;

pub use shape::{CustomMembership, Face, QuadraticLevelSet, Shape};
pub use spec::{BodySpec, FaceSpec, ShapeSpec};

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::estimate::EstimateWithError;
use crate::gaussian_space::normal_vec;
use crate::linalg::{axpy, dist, norm, normalized, scale, sub};
use crate::par;

/// Reach used for unbounded bodies: rays that are still inside at this distance from
/// the interior point count as infinite.
pub const T_MAX: f64 = 50.0;

/// Default bisection tolerance for the Minkowski functional.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterBound {
    /// The body lies in `B(0, R)`.
    Radius(f64),
    Unbounded { reach: f64 },
}

impl OuterBound {
    pub fn is_bounded(&self) -> bool {
        matches!(self, OuterBound::Radius(_))
    }
}

#[derive(Debug, Clone)]
pub struct ConvexBody {
    shape: Shape,
    dim: usize,
    center: Vec<f64>,
    margin: f64,
    outer: OuterBound,
}

impl ConvexBody {
    /// Wraps `shape` after checking its certificates: the interior point and 12 random
    /// points of `B(x0, 0.9 r0)` are inside, the outer bound holds on random probes,
    /// and midpoints of 1000 random pairs of inside points are inside.
    pub fn new(shape: Shape) -> Result<Self> {
        let dim = shape.dim();
        if dim == 0 {
            return Err(Error::Spec { path: "shape".into(), message: "dimension must be at least 1".into() });
        }
        let (center, margin) = shape.interior()?;
        check_dim(dim, center.len())?;
        if !(margin > 0.0 && margin.is_finite()) || center.iter().any(|v| !v.is_finite()) {
            return Err(Error::Spec { path: "shape".into(), message: "empty interior".into() });
        }
        let outer = shape.outer();
        let body = Self { shape, dim, center, margin, outer };
        body.validate()?;
        Ok(body)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim;
        if !self.contains(&self.center) {
            return Err(Error::OracleIntegrity("interior point is not inside".into()));
        }
        let mut rng = par::chunk_rng(0x5eed_b0d1, 0);
        for _ in 0..12 {
            let p = self.random_in_ball(&mut rng, &self.center, 0.9 * self.margin);
            if !self.contains(&p) {
                return Err(Error::OracleIntegrity(format!(
                    "point {p:?} of the certified interior ball is outside"
                )));
            }
        }
        if let OuterBound::Radius(r) = self.outer {
            for _ in 0..32 {
                let u = normalized(&normal_vec(&mut rng, n)).unwrap_or_else(|| crate::linalg::unit(n, 0));
                if self.contains(&scale(&u, r * (1.0 + 1e-9))) {
                    return Err(Error::OracleIntegrity(format!("body exceeds its outer radius {r}")));
                }
            }
        }
        let spread = self.search_radius().min(3.0);
        let mut inside: Vec<Vec<f64>> = Vec::with_capacity(2000);
        let mut draws = 0;
        while inside.len() < 2000 && draws < 40_000 {
            draws += 1;
            let p = axpy(&self.center, spread, &normal_vec(&mut rng, n));
            if self.contains(&p) {
                inside.push(p);
            }
        }
        for pair in inside.chunks_exact(2) {
            let mid: Vec<f64> = pair[0].iter().zip(&pair[1]).map(|(a, b)| 0.5 * (a + b)).collect();
            if !self.contains(&mid) {
                return Err(Error::Spec {
                    path: "shape".into(),
                    message: format!("membership is not convex: midpoint {mid:?} of two inside points is outside"),
                });
            }
        }
        Ok(())
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Spec { path: "radius".into(), message: "radius must be positive".into() });
        }
        Self::new(Shape::Ball { dim, radius })
    }

    pub fn ellipsoid(semiaxes: Vec<f64>) -> Result<Self> {
        if semiaxes.is_empty() || semiaxes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::Spec { path: "semiaxes".into(), message: "semiaxes must be positive".into() });
        }
        Self::new(Shape::Ellipsoid { semiaxes })
    }

    /// `{ <normal, x> < offset }`
    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        Self::new(Shape::Halfspace(unit_face(&normal, offset, "normal")?))
    }

    /// Intersection of the open halfspaces `<normal_i, x> < offset_i`.
    pub fn polytope(faces: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::Spec { path: "faces".into(), message: "polytope needs at least one face".into() });
        }
        let dim = faces[0].0.len();
        let faces = faces
            .iter()
            .enumerate()
            .map(|(i, (a, c))| {
                if a.len() != dim {
                    return Err(Error::Spec {
                        path: format!("faces[{i}].normal"),
                        message: format!("expected {dim} components"),
                    });
                }
                unit_face(a, *c, &format!("faces[{i}].normal"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(Shape::Polytope { faces })
    }

    /// `{ x : x without coordinate `axis` lies in base }`, with `base` one dimension lower.
    pub fn cylinder(base: &ConvexBody, axis: usize) -> Result<Self> {
        if axis > base.dim {
            return Err(Error::Spec { path: "axis".into(), message: format!("axis {axis} out of range") });
        }
        Self::new(Shape::Cylinder { base: Box::new(base.shape.clone()), axis })
    }

    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        check_dim(self.dim, shift.len())?;
        Self::new(Shape::Translate { inner: Box::new(self.shape.clone()), shift: shift.to_vec() })
    }

    /// `factor * self`
    pub fn dilate(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::Spec { path: "scale".into(), message: "scale must be positive".into() });
        }
        Self::new(Shape::Dilate { inner: Box::new(self.shape.clone()), factor })
    }

    /// `{ x^T A x + <b, x> + c < 0 }`
    pub fn level_set(matrix: Vec<Vec<f64>>, linear: Vec<f64>, constant: f64) -> Result<Self> {
        Self::new(Shape::LevelSet(QuadraticLevelSet::new(matrix, linear, constant)?))
    }

    pub fn custom(
        id: impl Into<String>,
        dim: usize,
        interior_point: Vec<f64>,
        margin: f64,
        outer: OuterBound,
        membership: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(Shape::Custom(CustomMembership {
            id: id.into(),
            dim,
            membership: Arc::new(membership),
            interior_point,
            margin,
            outer,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn shape_tag(&self) -> &'static str {
        self.shape.tag()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn outer(&self) -> OuterBound {
        self.outer
    }

    /// Distance from the interior point beyond which rays are no longer searched.
    pub fn search_radius(&self) -> f64 {
        match self.outer {
            OuterBound::Radius(r) => r + norm(&self.center),
            OuterBound::Unbounded { reach } => reach,
        }
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        self.shape.contains(x)
    }

    /// Exact Euclidean distance to the body (zero inside).
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        self.shape
            .distance_within(x, f64::INFINITY)?
            .ok_or_else(|| Error::Unsupported("distance computation did not converge".into()))
    }

    /// Distance when below `cap`, else `None`.
    pub fn distance_within(&self, x: &[f64], cap: f64) -> Result<Option<f64>> {
        self.shape.distance_within(x, cap)
    }

    /// Distance from the interior point to the boundary along the unit vector `u`,
    /// bisected to relative width `rel_tol` (0 bisects to machine precision). `None`
    /// when the ray is still inside at [`T_MAX`].
    pub fn radial_reach(&self, u: &[f64], rel_tol: f64) -> Result<Option<f64>> {
        let at = |r: f64| -> Vec<f64> { axpy(&self.center, r, u) };
        let mut lo = 0.5 * self.margin;
        if !self.contains(&at(lo)) {
            return Err(Error::OracleIntegrity(format!(
                "point at half the certified margin along {u:?} is outside"
            )));
        }
        let mut hi = self.search_radius() * (1.0 + 1e-9);
        if self.contains(&at(hi)) {
            return match self.outer {
                OuterBound::Radius(r) => {
                    Err(Error::OracleIntegrity(format!("ray along {u:?} exceeds outer radius {r}")))
                }
                OuterBound::Unbounded { .. } => Ok(None),
            };
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= rel_tol * lo {
                break;
            }
            if self.contains(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(0.5 * (lo + hi)))
    }

    /// Boundary point hit by the ray from the interior point along `u`, located to
    /// machine precision; `None` for rays escaping to [`T_MAX`].
    pub fn boundary_point(&self, u: &[f64]) -> Result<Option<Vec<f64>>> {
        Ok(self.radial_reach(u, 0.0)?.map(|r| axpy(&self.center, r, u)))
    }

    /// Minkowski functional with `|p - p_true| <= tol * max(1, p)`.
    pub fn gauge(&self, x: &[f64], tol: f64) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        if !(tol > 0.0) {
            return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite point".into()));
        }
        let offset = sub(x, &self.center);
        let d = norm(&offset);
        if d == 0.0 {
            return Ok(0.0);
        }
        let u = scale(&offset, 1.0 / d);
        Ok(match self.radial_reach(&u, 0.5 * tol)? {
            Some(r) => d / r,
            None => 0.0,
        })
    }

    /// Central-difference gradient of the Minkowski functional.
    pub fn gauge_gradient_fd(&self, x: &[f64], step: f64, tol: f64) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        if !(step >= tol.cbrt()) {
            return Err(Error::Parameter(format!(
                "step {step:e} is noise-dominated for tolerance {tol:e}; use step >= tol^(1/3) = {:e}",
                tol.cbrt()
            )));
        }
        if dist(x, &self.center) == 0.0 {
            return Err(Error::Precondition("gauge gradient requested at the interior point".into()));
        }
        let mut g = vec![0.0; self.dim];
        let mut xp = x.to_vec();
        for i in 0..self.dim {
            xp[i] = x[i] + step;
            let fp = self.gauge(&xp, tol)?;
            xp[i] = x[i] - step;
            let fm = self.gauge(&xp, tol)?;
            xp[i] = x[i];
            g[i] = (fp - fm) / (2.0 * step);
        }
        Ok(g)
    }

    /// Monte Carlo estimate of `vol(body ∩ B(x, radius)) / vol(B(x, radius))`.
    pub fn lebesgue_density(&self, x: &[f64], radius: f64, samples: usize, seed: u64) -> Result<EstimateWithError> {
        check_dim(self.dim, x.len())?;
        if !(radius > 0.0) {
            return Err(Error::Parameter("radius must be positive".into()));
        }
        if samples < 1000 {
            return Err(Error::Parameter("at least 1000 samples are required".into()));
        }
        let m = par::monte_carlo(samples, seed, |rng| {
            let p = self.random_in_ball(rng, x, radius);
            if self.contains(&p) {
                1.0
            } else {
                0.0
            }
        });
        Ok(EstimateWithError::from_moments(&m, seed))
    }

    fn random_in_ball<R: Rng + ?Sized>(&self, rng: &mut R, c: &[f64], r: f64) -> Vec<f64> {
        let n = self.dim;
        loop {
            if let Some(u) = normalized(&normal_vec(rng, n)) {
                let s: f64 = rng.random::<f64>().powf(1.0 / n as f64);
                return axpy(c, r * s, &u);
            }
        }
    }
}

fn unit_face(normal: &[f64], offset: f64, path: &str) -> Result<Face> {
    let l = norm(normal);
    if !(l > 0.0 && l.is_finite() && offset.is_finite()) {
        return Err(Error::Spec { path: path.into(), message: "normal must be finite and non-zero".into() });
    }
    Ok(Face { normal: scale(normal, 1.0 / l), offset: offset / l })
}

/// The Minkowski functional of `body` at `x` (bisection on the radial reach).
pub fn minkowski_functional(body: &ConvexBody, x: &[f64], tol: f64) -> Result<f64> {
    body.gauge(x, tol)
}

pub fn minkowski_gradient_fd(body: &ConvexBody, x: &[f64], step: f64, tol: f64) -> Result<Vec<f64>> {
    body.gauge_gradient_fd(x, step, tol)
}

pub fn lebesgue_density(
    body: &ConvexBody,
    x: &[f64],
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<EstimateWithError> {
    body.lebesgue_density(x, radius, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_gauge_is_scaled_norm() {
        let b = ConvexBody::ball(3, 2.0).unwrap();
        let x = [0.3, -1.2, 2.5];
        let p = b.gauge(&x, 1e-12).unwrap();
        assert!((p - norm(&x) / 2.0).abs() <= 1e-12 * p.max(1.0));
        assert_eq!(b.gauge(&[0.0; 3], 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn halfspace_boundary_has_gauge_one() {
        let h = ConvexBody::halfspace(vec![1.0, 0.0, 0.0], 1.5).unwrap();
        assert!((h.gauge(&[1.5, 0.0, 0.0], 1e-10).unwrap() - 1.0).abs() < 1e-10);
        // recession direction
        assert_eq!(h.gauge(&[-2.0, 0.0, 0.0], 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn gradient_examples() {
        let r = 1.5;
        let b = ConvexBody::ball(2, r).unwrap();
        let x = [r * 0.6, r * 0.8];
        let g = b.gauge_gradient_fd(&x, 1e-4, 1e-12).unwrap();
        assert!((g[0] - x[0] / (r * r)).abs() < 1e-7 && (g[1] - x[1] / (r * r)).abs() < 1e-7);

        let a = [1.0, 2.0];
        let c = 3.0;
        let h = ConvexBody::halfspace(a.to_vec(), c).unwrap();
        let x = [1.0, 1.0];
        let g = h.gauge_gradient_fd(&x, 1e-4, 1e-12).unwrap();
        assert!((g[0] - a[0] / c).abs() < 1e-7 && (g[1] - a[1] / c).abs() < 1e-7);

        assert!(matches!(b.gauge_gradient_fd(&x, 1e-6, 1e-10), Err(Error::Parameter(_))));
    }

    #[test]
    fn density_examples() {
        let sq = ConvexBody::polytope(vec![
            (vec![1.0, 0.0], 1.0),
            (vec![-1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 1.0),
            (vec![0.0, -1.0], 1.0),
        ])
        .unwrap();
        let d = sq.lebesgue_density(&[0.0, 0.0], 0.5, 20_000, 1).unwrap();
        assert_eq!(d.value, 1.0);
        let d = sq.lebesgue_density(&[1.0, 1.0], 0.1, 200_000, 2).unwrap();
        assert!(d.within_se(0.25, 3.0), "{d:?}");
        let h = ConvexBody::halfspace(vec![0.0, 1.0], 1.0).unwrap();
        let d = h.lebesgue_density(&[0.3, 1.0], 0.2, 200_000, 3).unwrap();
        assert!(d.within_se(0.5, 3.0), "{d:?}");
        assert!(h.lebesgue_density(&[0.3, 1.0], 0.2, 10, 3).is_err());
    }

    #[test]
    fn rejects_nonconvex_membership() {
        let annulus = ConvexBody::custom("annulus", 2, vec![1.5, 0.0], 0.4, OuterBound::Radius(2.0), |x| {
            let r = norm(x);
            r > 1.0 && r < 2.0
        });
        assert!(matches!(annulus, Err(Error::Spec { .. })));
    }

    #[test]
    fn rejects_lying_certificates() {
        let liar = ConvexBody::custom("liar", 2, vec![0.0, 0.0], 5.0, OuterBound::Radius(1.0), |x| norm(x) < 1.0);
        assert!(matches!(liar, Err(Error::OracleIntegrity(_))));
    }

    #[test]
    fn translated_body_keeps_gaussian_coordinates() {
        let b = ConvexBody::ball(2, 1.0).unwrap().translate(&[3.0, 0.0]).unwrap();
        assert!(b.contains(&[3.5, 0.0]) && !b.contains(&[0.0, 0.0]));
        assert_eq!(b.center(), &[3.0, 0.0]);
        assert!((b.gauge(&[4.0, 0.0], 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!((b.distance(&[5.0, 0.0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cylinder_membership_and_reach() {
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let cyl = ConvexBody::cylinder(&disk, 2).unwrap();
        assert!(cyl.contains(&[0.5, 0.0, 40.0]));
        assert_eq!(cyl.radial_reach(&[0.0, 0.0, 1.0], 1e-12).unwrap(), None);
        let r = cyl.radial_reach(&[1.0, 0.0, 0.0], 1e-12).unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-11);
    }
}
