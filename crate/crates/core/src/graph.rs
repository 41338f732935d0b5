//! Decomposition of a convex body along a direction `h`.
//!
//! Points are split as `x = y + t h` with `y` in the orthogonal complement of `h`. For
//! `y` in the projected domain the line `y + R h` meets the body in an open interval
//! `(g(y), f(y))`; `f` is the concave upper graph and `g` the convex lower graph.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convex_body::{ConvexBody, OuterBound, T_MAX};
use crate::error::{check_dim, Error, Result};
use crate::estimate::EstimateWithError;
use crate::gaussian_space::{density_unchecked, normal_vec, Direction, DEFAULT_FD_STEP};
use crate::linalg::{axpy, complement_basis, dot, norm, normalized, norm_sq, project_out};
use crate::par;

/// Upper (`f`) or lower (`g`) graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    BothInfinite,
    GFiniteOnly,
    FFiniteOnly,
    BothFinite,
}

impl CaseTag {
    pub fn is_finite(&self, which: Which) -> bool {
        match which {
            Which::Upper => matches!(self, CaseTag::FFiniteOnly | CaseTag::BothFinite),
            Which::Lower => matches!(self, CaseTag::GFiniteOnly | CaseTag::BothFinite),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    UpperGraph,
    LowerGraph,
    Vertical,
}

/// Angular tolerance (radians) under which a normal counts as orthogonal to `h`.
pub const VERTICAL_ANGLE: f64 = 1e-3;

/// Extent of a graph domain along a ray `anchor + r u` from its anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySpan {
    pub reach: f64,
    /// `(base, slope)` such that `y + (base + slope r) h` is inside the body over
    /// `y = anchor + r u`, for `r < reach`.
    pub height: Option<(f64, f64)>,
}

impl RaySpan {
    pub fn height_hint(&self, r: f64) -> Option<f64> {
        self.height.map(|(b, s)| b + s * r)
    }
}

/// A real function on (part of) the orthogonal complement of a direction, as consumed
/// by the area formula. Points `y` are given in ambient coordinates.
pub trait GraphFunction: Sync {
    fn direction(&self) -> &Direction;

    /// Orthonormal basis of the orthogonal complement of `h`.
    fn basis(&self) -> &[Vec<f64>];

    /// A point of the domain from which the domain is star-shaped.
    fn anchor(&self) -> &[f64];

    fn in_domain(&self, y: &[f64]) -> Result<bool>;

    /// Value at `y`, `None` outside the domain. May be infinite.
    fn value(&self, y: &[f64]) -> Result<Option<f64>>;

    /// Value and gradient (in the complement of `h`) by central differences, or
    /// analytically when available. Stencil points leaving the domain raise a margin
    /// error.
    fn value_and_gradient(&self, y: &[f64], fd_step: f64) -> Result<(f64, Vec<f64>)>;

    /// Whether `y +- reach b` lies in the domain for every basis vector `b`.
    fn stencil_in_domain(&self, y: &[f64], reach: f64) -> Result<bool> {
        for b in self.basis() {
            if !self.in_domain(&axpy(y, reach, b))? || !self.in_domain(&axpy(y, -reach, b))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Radius of a ball around the anchor contained in the domain, when known.
    fn anchor_margin(&self) -> Option<f64> {
        None
    }

    /// Domain extent along unit `u` (in the complement of `h`), capped at `cap`.
    fn ray_span(&self, u: &[f64], cap: f64) -> Result<RaySpan> {
        let a = self.anchor().to_vec();
        if self.in_domain(&axpy(&a, cap, u))? {
            return Ok(RaySpan { reach: cap, height: None });
        }
        let (mut lo, mut hi) = (0.0, cap);
        while hi - lo > 1e-13 * cap {
            let mid = 0.5 * (lo + hi);
            if self.in_domain(&axpy(&a, mid, u))? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(RaySpan { reach: lo, height: None })
    }

    /// Largest `r <= cap` with `anchor + s u` in the domain for all `s < r`.
    fn domain_reach(&self, u: &[f64], cap: f64) -> Result<f64> {
        Ok(self.ray_span(u, cap)?.reach)
    }

    /// Value and gradient for quadrature nodes: `None` outside the domain or when even
    /// a `1e-12` step does not fit. The step starts at `fd_step` and is halved until the
    /// stencil inflated twentyfold stays in the domain, which keeps the central
    /// difference accurate where the slope blows up near the rim. `height_hint` is a
    /// height likely inside the body over `y`.
    fn jet(&self, y: &[f64], fd_step: f64, height_hint: Option<f64>) -> Result<Option<(f64, Vec<f64>)>> {
        let _ = height_hint;
        if !self.in_domain(y)? {
            return Ok(None);
        }
        let mut s = fd_step;
        while s >= 1e-12 {
            if self.stencil_in_domain(y, 20.0 * s)? {
                match self.value_and_gradient(y, s) {
                    Ok(v) => return Ok(Some(v)),
                    Err(Error::Margin(_)) | Err(Error::Domain(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            s *= 0.5;
        }
        Ok(None)
    }
}

fn check_orthogonal(h: &Direction, y: &[f64]) -> Result<()> {
    check_dim(h.dim(), y.len())?;
    let c = dot(h.as_slice(), y);
    if c.abs() > 1e-10 * norm(y).max(1.0) {
        return Err(Error::Domain(format!("point is not orthogonal to h (<h, y> = {c:e})")));
    }
    Ok(())
}

/// Largest `|t|` at which the line may still meet the body.
fn line_bound(body: &ConvexBody) -> f64 {
    match body.outer() {
        OuterBound::Radius(r) => r * (1.0 + 1e-9),
        OuterBound::Unbounded { .. } => T_MAX,
    }
}

/// Some `t` with `y + t h` inside, trying `hints` first and then minimizing the
/// (convex) gauge along the line by golden section.
fn inside_on_line(body: &ConvexBody, h: &[f64], y: &[f64], hints: &[f64]) -> Result<Option<f64>> {
    let bound = line_bound(body);
    if let OuterBound::Radius(r) = body.outer() {
        if norm(y) >= r {
            return Ok(None);
        }
    }
    for &t in hints {
        if t.is_finite() && t.abs() < bound && body.contains(&axpy(y, t, h)) {
            return Ok(Some(t));
        }
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let phi = |t: f64| -> Result<(f64, bool)> {
        let x = axpy(y, t, h);
        if body.contains(&x) {
            return Ok((0.0, true));
        }
        Ok((body.gauge(&x, 1e-9)?, false))
    };
    let (mut a, mut b) = (-bound, bound);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, inside) = phi(c)?;
    if inside {
        return Ok(Some(c));
    }
    let (mut fd, inside) = phi(d)?;
    if inside {
        return Ok(Some(d));
    }
    while b - a > 1e-13 * bound {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            let (v, inside) = phi(c)?;
            if inside {
                return Ok(Some(c));
            }
            fc = v;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            let (v, inside) = phi(d)?;
            if inside {
                return Ok(Some(d));
            }
            fd = v;
        }
    }
    Ok(None)
}

/// Endpoint of the section on the side `which`, starting from an inside `t_in`.
/// Bisects to absolute width `tol` (0 for machine precision).
fn endpoint(body: &ConvexBody, h: &[f64], y: &[f64], t_in: f64, which: Which, tol: f64) -> Result<f64> {
    let bound = line_bound(body);
    let far = match which {
        Which::Upper => bound,
        Which::Lower => -bound,
    };
    if body.contains(&axpy(y, far, h)) {
        return match body.outer() {
            OuterBound::Radius(r) => Err(Error::OracleIntegrity(format!(
                "line through {y:?} is inside beyond the outer radius {r}"
            ))),
            OuterBound::Unbounded { .. } => Ok(match which {
                Which::Upper => f64::INFINITY,
                Which::Lower => f64::NEG_INFINITY,
            }),
        };
    }
    let (mut inside, mut outside) = (t_in, far);
    loop {
        let mid = 0.5 * (inside + outside);
        if (outside - inside).abs() <= tol || mid == inside || mid == outside {
            break;
        }
        if body.contains(&axpy(y, mid, h)) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

fn section_with(body: &ConvexBody, h: &[f64], y: &[f64], hints: &[f64], tol: f64) -> Result<Option<(f64, f64)>> {
    let Some(t_in) = inside_on_line(body, h, y, hints)? else {
        return Ok(None);
    };
    let lo = endpoint(body, h, y, t_in, Which::Lower, tol)?;
    let hi = endpoint(body, h, y, t_in, Which::Upper, tol)?;
    let wide = hi - lo > 1e-9 * (1.0 + lo.abs().max(hi.abs()));
    if lo.is_finite() && hi.is_finite() && wide && !body.contains(&axpy(y, 0.5 * (lo + hi), h)) {
        return Err(Error::OracleIntegrity(format!("midpoint of the section at {y:?} is outside")));
    }
    Ok(Some((lo, hi)))
}

/// The open interval `(g(y), f(y))` of `t` with `y + t h` inside, located to absolute
/// tolerance `tol`; `None` when `y` is outside the projected domain. Endpoints at the
/// reach limit are reported as infinite.
pub fn section_interval(body: &ConvexBody, h: &Direction, y: &[f64], tol: f64) -> Result<Option<(f64, f64)>> {
    check_dim(body.dim(), y.len())?;
    check_orthogonal(h, y)?;
    if !(tol >= 0.0) {
        return Err(Error::Parameter("tolerance must be non-negative".into()));
    }
    section_with(body, h.as_slice(), y, &[dot(h.as_slice(), body.center())], tol)
}

fn tag_of(lower_finite: bool, upper_finite: bool) -> CaseTag {
    match (lower_finite, upper_finite) {
        (true, true) => CaseTag::BothFinite,
        (false, true) => CaseTag::FFiniteOnly,
        (true, false) => CaseTag::GFiniteOnly,
        (false, false) => CaseTag::BothInfinite,
    }
}

/// Probes sections at `probes` points of the projected domain and returns the case
/// tag they agree on.
pub fn classify_case(body: &ConvexBody, h: &Direction, probes: usize, seed: u64) -> Result<CaseTag> {
    check_dim(body.dim(), h.dim())?;
    if probes < 8 {
        return Err(Error::Parameter("at least 8 probes are required".into()));
    }
    let n = body.dim();
    let c = body.center();
    let mut rng = par::chunk_rng(seed, 0);
    let mut tag = None;
    for i in 0..probes {
        let mut x = None;
        if i % 2 == 1 {
            for _ in 0..64 {
                let p = axpy(c, 2.0, &normal_vec(&mut rng, n));
                if body.contains(&p) {
                    x = Some(p);
                    break;
                }
            }
        }
        let x = match x {
            Some(p) => p,
            None => {
                let u = normalized(&normal_vec(&mut rng, n)).unwrap_or_else(|| crate::linalg::unit(n, 0));
                let s: f64 = rand::Rng::random::<f64>(&mut rng);
                axpy(c, 0.9 * body.margin() * s, &u)
            }
        };
        let t = dot(h.as_slice(), &x);
        let y = axpy(&x, -t, h.as_slice());
        let Some((lo, hi)) = section_with(body, h.as_slice(), &y, &[t], 0.0)? else {
            return Err(Error::OracleIntegrity(format!("inside point {x:?} has an empty section")));
        };
        let here = tag_of(lo.is_finite(), hi.is_finite());
        match tag {
            None => tag = Some(here),
            Some(prev) if prev != here => {
                return Err(Error::OracleIntegrity(format!(
                    "sections disagree on the case: {prev:?} and {here:?}"
                )))
            }
            _ => {}
        }
    }
    Ok(tag.expect("probes >= 8"))
}

/// A body together with a decomposition direction.
#[derive(Debug, Clone)]
pub struct GraphPair {
    body: ConvexBody,
    h: Direction,
    basis: Vec<Vec<f64>>,
    anchor: Vec<f64>,
    t0: f64,
    case: CaseTag,
}

impl GraphPair {
    pub fn new(body: &ConvexBody, h: Direction) -> Result<Self> {
        check_dim(body.dim(), h.dim())?;
        let case = classify_case(body, &h, 16, 0x6a09_e667)?;
        let basis = complement_basis(body.dim(), &[h.to_vec()]);
        let t0 = dot(h.as_slice(), body.center());
        let anchor = axpy(body.center(), -t0, h.as_slice());
        Ok(Self { body: body.clone(), h, basis, anchor, t0, case })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn case_tag(&self) -> CaseTag {
        self.case
    }

    /// `<h, x0>` for the interior point `x0`.
    pub fn center_height(&self) -> f64 {
        self.t0
    }

    /// The section at `y` to machine precision.
    pub fn section(&self, y: &[f64]) -> Result<Option<(f64, f64)>> {
        check_dim(self.body.dim(), y.len())?;
        section_with(&self.body, self.h.as_slice(), y, &[self.t0], 0.0)
    }

    pub fn graph(&self, which: Which) -> BodyGraph<'_> {
        BodyGraph { pair: self, which }
    }

    fn endpoint_at(&self, y: &[f64], which: Which, hints: &[f64]) -> Result<Option<f64>> {
        let h = self.h.as_slice();
        match inside_on_line(&self.body, h, y, hints)? {
            None => Ok(None),
            Some(t_in) => Ok(Some(endpoint(&self.body, h, y, t_in, which, 0.0)?)),
        }
    }
}

/// One graph of a [`GraphPair`].
#[derive(Debug, Clone, Copy)]
pub struct BodyGraph<'a> {
    pair: &'a GraphPair,
    which: Which,
}

impl BodyGraph<'_> {
    pub fn which(&self) -> Which {
        self.which
    }
}

impl GraphFunction for BodyGraph<'_> {
    fn direction(&self) -> &Direction {
        &self.pair.h
    }

    fn basis(&self) -> &[Vec<f64>] {
        &self.pair.basis
    }

    fn anchor(&self) -> &[f64] {
        &self.pair.anchor
    }

    fn in_domain(&self, y: &[f64]) -> Result<bool> {
        Ok(inside_on_line(&self.pair.body, self.pair.h.as_slice(), y, &[self.pair.t0])?.is_some())
    }

    fn value(&self, y: &[f64]) -> Result<Option<f64>> {
        self.pair.endpoint_at(y, self.which, &[self.pair.t0])
    }

    fn value_and_gradient(&self, y: &[f64], fd_step: f64) -> Result<(f64, Vec<f64>)> {
        graph_value_and_gradient(self.pair, self.which, y, fd_step)
    }

    fn anchor_margin(&self) -> Option<f64> {
        // projection of the certified interior ball
        Some(self.pair.body.margin())
    }

    fn jet(&self, y: &[f64], fd_step: f64, height_hint: Option<f64>) -> Result<Option<(f64, Vec<f64>)>> {
        let pair = self.pair;
        let body = &pair.body;
        let h = pair.h.as_slice();
        let mut hints = Vec::with_capacity(2);
        hints.extend(height_hint);
        hints.push(pair.t0);
        let Some(t_in) = inside_on_line(body, h, y, &hints)? else {
            return Ok(None);
        };
        let lo = endpoint(body, h, y, t_in, Which::Lower, 0.0)?;
        let hi = endpoint(body, h, y, t_in, Which::Upper, 0.0)?;
        let value = match self.which {
            Which::Upper => hi,
            Which::Lower => lo,
        };
        if !value.is_finite() {
            return Err(Error::Case(format!("the {:?} graph is infinite", self.which)));
        }
        let hints = section_hints(lo, hi, t_in);
        let mut s = fd_step;
        'step: while s >= 1e-12 {
            for b in &pair.basis {
                for off in [20.0 * s, -20.0 * s] {
                    if inside_on_line(body, h, &axpy(y, off, b), &hints)?.is_none() {
                        s *= 0.5;
                        continue 'step;
                    }
                }
            }
            let mut grad = vec![0.0; y.len()];
            for b in &pair.basis {
                let plus = pair.endpoint_at(&axpy(y, s, b), self.which, &hints)?;
                let minus = pair.endpoint_at(&axpy(y, -s, b), self.which, &hints)?;
                let (Some(p), Some(m)) = (plus, minus) else {
                    s *= 0.5;
                    continue 'step;
                };
                crate::linalg::axpy_into(&mut grad, (p - m) / (2.0 * s), b);
            }
            return Ok(Some((value, grad)));
        }
        Ok(None)
    }

    /// The projected domain's radial function is the largest `u`-coordinate of the
    /// two-dimensional section of the body by the plane through the interior point
    /// spanned by `u` and `h`. Along that convex section's boundary the coordinate is
    /// unimodal in the angle, so a golden-section search over ray casts finds it. The
    /// segment from the interior point to the maximizer lies inside, which supplies
    /// the height hints.
    fn ray_span(&self, u: &[f64], cap: f64) -> Result<RaySpan> {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let body = &self.pair.body;
        let h = self.pair.h.as_slice();
        let t0 = self.pair.t0;
        let along = |theta: f64| -> Result<Option<f64>> {
            let dir: Vec<f64> = u.iter().zip(h).map(|(a, b)| theta.cos() * a + theta.sin() * b).collect();
            Ok(body.radial_reach(&dir, 0.0)?.map(|r| r * theta.cos()))
        };
        let escaped = |theta: f64| RaySpan { reach: cap, height: Some((t0, theta.tan())) };
        let half = 0.5 * PI;
        let (mut a, mut b) = (-half, half);
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let Some(mut fc) = along(c)? else {
            return Ok(escaped(c));
        };
        let Some(mut fd) = along(d)? else {
            return Ok(escaped(d));
        };
        while b - a > 1e-14 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                match along(c)? {
                    Some(v) => fc = v,
                    None => return Ok(escaped(c)),
                }
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                match along(d)? {
                    Some(v) => fd = v,
                    None => return Ok(escaped(d)),
                }
            }
        }
        let (theta, reach) = if fc > fd { (c, fc) } else { (d, fd) };
        Ok(RaySpan { reach: reach.min(cap), height: Some((t0, theta.tan())) })
    }
}

fn section_hints(lo: f64, hi: f64, t0: f64) -> [f64; 3] {
    let mid = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => t0,
    };
    [mid, t0, 0.5 * (mid + t0)]
}

/// Value and central-difference gradient of `f` (upper) or `g` (lower) at `y`.
pub fn graph_value_and_gradient(pair: &GraphPair, which: Which, y: &[f64], fd_step: f64) -> Result<(f64, Vec<f64>)> {
    check_dim(pair.body.dim(), y.len())?;
    check_orthogonal(&pair.h, y)?;
    if !(fd_step > 0.0) {
        return Err(Error::Parameter("finite-difference step must be positive".into()));
    }
    let Some((lo, hi)) = pair.section(y)? else {
        return Err(Error::Domain(format!("{y:?} is outside the projected domain")));
    };
    let value = match which {
        Which::Upper => hi,
        Which::Lower => lo,
    };
    if !value.is_finite() {
        return Err(Error::Case(format!("the {which:?} graph is infinite")));
    }
    let mid = if lo.is_finite() && hi.is_finite() { 0.5 * (lo + hi) } else { value - which_sign(which) };
    let hints = [mid, value - which_sign(which) * 1e-9, pair.t0];
    let mut grad = vec![0.0; y.len()];
    for b in &pair.basis {
        let plus = pair.endpoint_at(&axpy(y, fd_step, b), which, &hints)?;
        let minus = pair.endpoint_at(&axpy(y, -fd_step, b), which, &hints)?;
        let (Some(p), Some(m)) = (plus, minus) else {
            return Err(Error::Margin(format!(
                "stencil of step {fd_step:e} at {y:?} leaves the projected domain"
            )));
        };
        let d = (p - m) / (2.0 * fd_step);
        crate::linalg::axpy_into(&mut grad, d, b);
    }
    Ok((value, grad))
}

fn which_sign(which: Which) -> f64 {
    match which {
        Which::Upper => 1.0,
        Which::Lower => -1.0,
    }
}

/// Classifies a boundary point as lying on the upper graph, the lower graph, or the
/// vertical part, with absolute tolerance `100 tol` on the height.
pub fn boundary_classify(body: &ConvexBody, pair: &GraphPair, x: &[f64], tol: f64) -> Result<BoundaryClass> {
    check_dim(body.dim(), x.len())?;
    let p = body.gauge(x, tol)?;
    if (p - 1.0).abs() > 10.0 * tol {
        return Err(Error::Precondition(format!("point is not on the boundary (gauge {p})")));
    }
    let h = pair.h.as_slice();
    let t = dot(h, x);
    let y = axpy(x, -t, h);
    let atol = 100.0 * tol;
    Ok(match pair.section(&y)? {
        None => BoundaryClass::Vertical,
        Some((lo, hi)) => {
            if (t - hi).abs() <= atol {
                BoundaryClass::UpperGraph
            } else if (t - lo).abs() <= atol {
                BoundaryClass::LowerGraph
            } else {
                BoundaryClass::Vertical
            }
        }
    })
}

/// A ray-cast boundary point with its outward unit normal and the weight that turns a
/// uniform average over ray directions into an integral against `G_n dS`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
}

fn sphere_area(n: usize) -> f64 {
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
    let half = n as f64 / 2.0;
    2.0 * PI.powf(half) / gamma_half_integer(n)
}

/// `Gamma(n / 2)` for positive integers `n`.
pub(crate) fn gamma_half_integer(n: usize) -> f64 {
    let mut g = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut k = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while k < n as f64 / 2.0 - 1e-9 {
        g *= k;
        k += 1.0;
    }
    g
}

/// Ray-casts `count` boundary points along uniform directions from the interior point.
/// Rays that escape to the reach limit are dropped but still count toward the average
/// (their weight is zero).
pub fn boundary_samples(body: &ConvexBody, count: usize, seed: u64) -> Result<Vec<BoundarySample>> {
    if count == 0 {
        return Err(Error::Parameter("at least one sample is required".into()));
    }
    let n = body.dim();
    let area = sphere_area(n);
    let chunks = par::map_chunks(count, seed, |rng, len| {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let u = loop {
                if let Some(u) = normalized(&normal_vec(rng, n)) {
                    break u;
                }
            };
            out.push(ray_sample(body, &u, area));
        }
        out
    });
    chunks.into_iter().flatten().collect()
}

fn ray_sample(body: &ConvexBody, u: &[f64], area: f64) -> Result<BoundarySample> {
    let n = body.dim();
    let Some(r) = body.radial_reach(u, 0.0)? else {
        return Ok(BoundarySample { point: Vec::new(), normal: Vec::new(), weight: 0.0 });
    };
    let point = axpy(body.center(), r, u);
    let grad = body.gauge_gradient_fd(&point, 1e-4, 1e-12)?;
    let normal = normalized(&grad).ok_or_else(|| Error::OracleIntegrity("zero gauge gradient".into()))?;
    let cos = dot(u, &normal).max(1e-12);
    let weight = area * density_unchecked(n, norm_sq(&point)) * r.powi(n as i32 - 1) / cos;
    Ok(BoundarySample { point, normal, weight })
}

/// Fraction of Gaussian surface measure carried by boundary points whose normal is
/// orthogonal to `h` within [`VERTICAL_ANGLE`], as a ratio estimate over `samples`.
pub fn vertical_fraction(samples: &[BoundarySample], h: &Direction, seed: u64) -> EstimateWithError {
    let limit = VERTICAL_ANGLE.sin();
    let n = samples.len() as f64;
    let flags: Vec<f64> = samples
        .iter()
        .map(|s| if s.weight > 0.0 && dot(&s.normal, h.as_slice()).abs() < limit { 1.0 } else { 0.0 })
        .collect();
    let mean_w = samples.iter().map(|s| s.weight).sum::<f64>() / n;
    let mean_a = samples.iter().zip(&flags).map(|(s, v)| s.weight * v).sum::<f64>() / n;
    if mean_w == 0.0 {
        return EstimateWithError {
            value: 0.0,
            std_error: 0.0,
            n_samples: samples.len() as u64,
            seed,
            method: crate::estimate::Method::MonteCarlo,
        };
    }
    let ratio = mean_a / mean_w;
    let var = samples
        .iter()
        .zip(&flags)
        .map(|(s, v)| {
            let e = s.weight * v - ratio * s.weight;
            e * e
        })
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    EstimateWithError {
        value: ratio,
        std_error: (var / n).sqrt() / mean_w,
        n_samples: samples.len() as u64,
        seed,
        method: crate::estimate::Method::MonteCarlo,
    }
}

/// Vertical mass of `body` for a single direction.
pub fn vertical_mass(body: &ConvexBody, h: &Direction, samples: usize, seed: u64) -> Result<EstimateWithError> {
    check_dim(body.dim(), h.dim())?;
    let s = boundary_samples(body, samples, seed)?;
    Ok(vertical_fraction(&s, h, seed))
}

/// Coordinate axes followed by `extra` random unit vectors.
pub fn default_candidates(dim: usize, extra: usize, seed: u64) -> Vec<Direction> {
    let mut out: Vec<Direction> = (0..dim).map(|i| Direction::axis(dim, i)).collect();
    let mut rng = par::chunk_rng(seed, 0);
    while out.len() < dim + extra {
        if let Ok(d) = Direction::new(normal_vec(&mut rng, dim)) {
            out.push(d);
        }
    }
    out
}

/// The candidate with the smallest estimated vertical mass (first one on ties).
pub fn choose_direction(
    body: &ConvexBody,
    candidates: &[Direction],
    boundary_samples_count: usize,
    seed: u64,
) -> Result<(Direction, EstimateWithError)> {
    if candidates.is_empty() {
        return Err(Error::Parameter("no candidate directions".into()));
    }
    for c in candidates {
        check_dim(body.dim(), c.dim())?;
    }
    let samples = boundary_samples(body, boundary_samples_count, seed)?;
    let mut best: Option<(usize, EstimateWithError)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let e = vertical_fraction(&samples, c, seed);
        if best.as_ref().is_none_or(|(_, b)| e.value < b.value) {
            best = Some((i, e));
        }
    }
    let (i, e) = best.expect("candidates nonempty");
    if e.value > 0.5 {
        return Err(Error::Direction(format!(
            "every candidate has vertical mass above 0.5 (best {:.3}); supply more candidate directions",
            e.value
        )));
    }
    Ok((candidates[i].clone(), e))
}

/// Rejects `h` when its estimated vertical mass exceeds `threshold`.
pub fn require_transverse(body: &ConvexBody, h: &Direction, samples: usize, seed: u64, threshold: f64) -> Result<EstimateWithError> {
    let e = vertical_mass(body, h, samples, seed)?;
    if e.value > threshold {
        return Err(Error::Direction(format!(
            "vertical mass {:.3} along h exceeds {threshold}; choose a different h",
            e.value
        )));
    }
    Ok(e)
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A function given by a closure on the complement of `h`, optionally restricted to a
/// convex domain star-shaped from `anchor`.
#[derive(Clone)]
pub struct ExplicitGraph {
    h: Direction,
    basis: Vec<Vec<f64>>,
    anchor: Vec<f64>,
    value: ScalarFn,
    gradient: Option<VectorFn>,
    domain: Option<Predicate>,
}

impl std::fmt::Debug for ExplicitGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExplicitGraph").field("h", &self.h).field("anchor", &self.anchor).finish_non_exhaustive()
    }
}

impl ExplicitGraph {
    pub fn new(h: Direction, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let n = h.dim();
        let basis = complement_basis(n, &[h.to_vec()]);
        Self { h, basis, anchor: vec![0.0; n], value: Arc::new(value), gradient: None, domain: None }
    }

    /// `f(y) = <a, y> + c`; the component of `a` along `h` is ignored.
    pub fn affine(h: Direction, a: &[f64], c: f64) -> Result<Self> {
        check_dim(h.dim(), a.len())?;
        let a = project_out(a, &[h.to_vec()]);
        let ga = a.clone();
        Ok(Self::new(h, move |y| dot(&a, y) + c).with_gradient(move |_| ga.clone()))
    }

    pub fn with_gradient(mut self, gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    /// Restricts the function to the convex set `domain`, which must contain `anchor`.
    pub fn with_domain(
        mut self,
        anchor: Vec<f64>,
        domain: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        check_dim(self.h.dim(), anchor.len())?;
        check_orthogonal(&self.h, &anchor)?;
        if !domain(&anchor) {
            return Err(Error::Domain("anchor is outside the domain".into()));
        }
        self.anchor = anchor;
        self.domain = Some(Arc::new(domain));
        Ok(self)
    }
}

impl GraphFunction for ExplicitGraph {
    fn direction(&self) -> &Direction {
        &self.h
    }

    fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    fn in_domain(&self, y: &[f64]) -> Result<bool> {
        Ok(self.domain.as_ref().is_none_or(|d| d(y)))
    }

    fn anchor_margin(&self) -> Option<f64> {
        if self.domain.is_none() {
            Some(f64::INFINITY)
        } else {
            None
        }
    }

    fn value(&self, y: &[f64]) -> Result<Option<f64>> {
        check_dim(self.h.dim(), y.len())?;
        Ok(if self.in_domain(y)? { Some((self.value)(y)) } else { None })
    }

    fn value_and_gradient(&self, y: &[f64], fd_step: f64) -> Result<(f64, Vec<f64>)> {
        check_dim(self.h.dim(), y.len())?;
        check_orthogonal(&self.h, y)?;
        if !self.in_domain(y)? {
            return Err(Error::Domain(format!("{y:?} is outside the domain")));
        }
        let v = (self.value)(y);
        if let Some(g) = &self.gradient {
            return Ok((v, project_out(&g(y), &[self.h.to_vec()])));
        }
        let mut grad = vec![0.0; y.len()];
        for b in &self.basis {
            let p = axpy(y, fd_step, b);
            let m = axpy(y, -fd_step, b);
            if !self.in_domain(&p)? || !self.in_domain(&m)? {
                return Err(Error::Margin(format!("stencil of step {fd_step:e} leaves the domain")));
            }
            crate::linalg::axpy_into(&mut grad, ((self.value)(&p) - (self.value)(&m)) / (2.0 * fd_step), b);
        }
        Ok((v, grad))
    }
}

/// Default step for graph gradients.
pub const GRAPH_FD_STEP: f64 = DEFAULT_FD_STEP;
