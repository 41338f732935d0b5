//! Gaussian surface integrals: the area formula over graphs, finite-dimensional
//! subspace measures, total boundary measure and a Minkowski-content estimate.

use serde::{Deserialize, Serialize};

use crate::convex_body::{ConvexBody, OuterBound, T_MAX};
use crate::error::{check_dim, Error, Result};
use crate::estimate::EstimateWithError;
use crate::gaussian_space::{density_unchecked, g1, normal_vec, GaussianModel, DEFAULT_FD_STEP};
use crate::graph::{require_transverse, CaseTag, GraphFunction, GraphPair, Which};
use crate::linalg::{axpy, complement_basis, dot, is_orthonormal, norm, norm_sq, project_out};
use crate::par::{self, Moments};
use crate::quadrature::{gauss_legendre, rim_mapped, sphere_rule, Rule};

/// Graph integrals are restricted to `|y - anchor| <= 12 + |anchor|`, which contains the
/// ball `|y| <= 12`; the dropped Gaussian mass is below `1e-30` in the dimensions where
/// quadrature is used.
pub const TRUNCATION_RADIUS: f64 = 12.0;

/// Vertical-mass threshold above which the graph parameterization is refused.
pub const VERTICAL_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Angular and radial order of the polar product rule when the graph domain has
    /// dimension 1 or 2.
    pub order: usize,
    /// Order used when the graph domain has dimension 3.
    pub order_3d: usize,
    /// Monte Carlo samples when the graph domain has dimension above 3.
    pub samples: usize,
    /// Ray-cast boundary samples for the vertical-mass check.
    pub vertical_samples: usize,
    /// Initial step of graph gradients; halved near the rim of the domain.
    pub fd_step: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { order: 64, order_3d: 24, samples: 200_000, vertical_samples: 1000, fd_step: DEFAULT_FD_STEP }
    }
}

/// A node of the area formula: `x = y + height * h` on the graph, with the graph
/// gradient at `y`.
#[derive(Debug, Clone, Copy)]
pub struct GraphPoint<'a> {
    pub y: &'a [f64],
    pub height: f64,
    pub x: &'a [f64],
    pub gradient: &'a [f64],
}

/// `G_1(f(y)) sqrt(1 + |grad f(y)|^2) weight(point)` at `y`; zero where the graph
/// supplies no jet (outside the domain or at its rim).
fn node_value<G, W>(graph: &G, y: &[f64], step: f64, hint: Option<f64>, weight: &W) -> Result<f64>
where
    G: GraphFunction + ?Sized,
    W: Fn(&GraphPoint) -> f64 + ?Sized,
{
    let Some((v, grad)) = graph.jet(y, step, hint)? else {
        return Ok(0.0);
    };
    if !v.is_finite() {
        return Err(Error::Case("the selected graph is infinite".into()));
    }
    let x = axpy(y, v, graph.direction().as_slice());
    let p = GraphPoint { y, height: v, x: &x, gradient: &grad };
    Ok(g1(v) * (1.0 + norm_sq(&grad)).sqrt() * weight(&p))
}

/// `int G_1(f(y)) sqrt(1 + |grad f(y)|^2) weight(y + f(y) h) dgamma(y)` over the domain
/// of `graph` in the complement of `h`.
///
/// For a domain of dimension `d <= 3` this is a polar product rule around the anchor:
/// a sphere rule for directions, and for each direction Gauss-Legendre in the radius,
/// sine-mapped toward the rim when the domain ends before the truncation radius. The
/// mapping absorbs the inverse-square-root slope blow-up of smooth bodies at the rim,
/// where a Gauss-Hermite product rule does not converge at a useful rate. Higher
/// dimensions use Monte Carlo over the Gaussian law of the complement.
pub fn area_formula_with<G, W>(graph: &G, weight: W, budget: &Budget, seed: u64) -> Result<EstimateWithError>
where
    G: GraphFunction + ?Sized,
    W: Fn(&GraphPoint) -> f64 + Sync,
{
    let d = graph.basis().len();
    if d == 0 {
        // One-dimensional ambient space: the graph is a single point.
        let v = node_value(graph, graph.anchor(), budget.fd_step, None, &weight)?;
        return Ok(EstimateWithError::quadrature(v, 1));
    }
    if d > 3 {
        return area_monte_carlo(graph, &weight, budget, seed);
    }
    let order = if d == 3 { budget.order_3d } else { budget.order };
    if order < 2 {
        return Err(Error::Parameter("quadrature order must be at least 2".into()));
    }
    let anchor = graph.anchor().to_vec();
    let cap = TRUNCATION_RADIUS + norm(&anchor);
    let full = gauss_legendre(order);
    let dirs = sphere_rule(d, order);
    let margin = graph.anchor_margin();
    let parts = par::map_slice(&dirs, |(coef, wdir)| -> Result<(f64, u64)> {
        let mut u = vec![0.0; anchor.len()];
        for (c, b) in coef.iter().zip(graph.basis()) {
            crate::linalg::axpy_into(&mut u, *c, b);
        }
        let span = graph.ray_span(&u, cap)?;
        let reach = span.reach;
        if reach <= 0.0 {
            return Ok((0.0, 0));
        }
        let radial = if reach >= cap {
            Rule {
                nodes: full.nodes.iter().map(|s| 0.5 * cap * (s + 1.0)).collect(),
                weights: full.weights.iter().map(|w| 0.5 * cap * w).collect(),
            }
        } else {
            rim_mapped(order, reach)
        };
        let mut acc = 0.0;
        for (&r, &w) in radial.nodes.iter().zip(&radial.weights) {
            let y = axpy(&anchor, r, &u);
            let dens = density_unchecked(d, norm_sq(&y));
            if dens == 0.0 {
                continue;
            }
            // the hull of the anchor's interior ball and the rim point contains a ball
            // of radius margin * (1 - r / reach) around y
            let step = match margin {
                Some(m) if reach < cap => budget.fd_step.min(m * (1.0 - r / reach) / 40.0),
                _ => budget.fd_step,
            };
            acc += w * r.powi(d as i32 - 1) * dens * node_value(graph, &y, step, span.height_hint(r), &weight)?;
        }
        Ok((wdir * acc, radial.len() as u64))
    });
    let mut total = 0.0;
    let mut nodes = 0;
    for p in parts {
        let (v, k) = p?;
        total += v;
        nodes += k;
    }
    Ok(EstimateWithError::quadrature(total, nodes))
}

fn area_monte_carlo<G, W>(graph: &G, weight: &W, budget: &Budget, seed: u64) -> Result<EstimateWithError>
where
    G: GraphFunction + ?Sized,
    W: Fn(&GraphPoint) -> f64 + Sync,
{
    if budget.samples < 2 {
        return Err(Error::Parameter("at least two samples are required".into()));
    }
    let basis = graph.basis();
    let n = graph.direction().dim();
    let parts = par::map_chunks(budget.samples, seed, |rng, len| -> Result<Moments> {
        let mut m = Moments::default();
        for _ in 0..len {
            let z = normal_vec(rng, basis.len());
            let mut y = vec![0.0; n];
            for (c, b) in z.iter().zip(basis) {
                crate::linalg::axpy_into(&mut y, *c, b);
            }
            m.push(node_value(graph, &y, budget.fd_step, None, weight)?);
        }
        Ok(m)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EstimateWithError::from_moments(&Moments::merged(&parts), seed))
}

fn check_graph(pair: &GraphPair, which: Which) -> Result<()> {
    if !pair.case_tag().is_finite(which) {
        return Err(Error::Case(format!(
            "the {which:?} graph is infinite for case {:?}",
            pair.case_tag()
        )));
    }
    Ok(())
}

/// Area formula for one graph of a body with a pointwise integrand on the surface.
pub fn area_formula_integral(
    pair: &GraphPair,
    which: Which,
    integrand: &(dyn Fn(&[f64]) -> f64 + Sync),
    model: &GaussianModel,
    budget: &Budget,
    seed: u64,
) -> Result<EstimateWithError> {
    check_dim(model.dim(), pair.body().dim())?;
    check_graph(pair, which)?;
    area_formula_with(&pair.graph(which), |p: &GraphPoint| integrand(p.x), budget, seed)
}

/// Gaussian perimeter of the epigraph of `graph` inside the cylinder over its domain.
pub fn epigraph_perimeter<G: GraphFunction + ?Sized>(
    graph: &G,
    model: &GaussianModel,
    budget: &Budget,
    seed: u64,
) -> Result<EstimateWithError> {
    check_dim(model.dim(), graph.direction().dim())?;
    area_formula_with(graph, |_: &GraphPoint| 1.0, budget, seed)
}

/// Sum of the area formula with integrand 1 over the finite graphs, after checking that
/// the vertical part along `h` carries negligible mass.
pub fn total_boundary_measure(body: &ConvexBody, pair: &GraphPair, budget: &Budget, seed: u64) -> Result<EstimateWithError> {
    check_dim(body.dim(), pair.body().dim())?;
    let h = pair.graph(Which::Upper).direction().clone();
    if pair.case_tag() == CaseTag::BothInfinite {
        return Err(Error::Direction("every line along h is inside the body; choose a different h".into()));
    }
    require_transverse(body, &h, budget.vertical_samples, par::derive_seed(seed, "vertical"), VERTICAL_THRESHOLD)?;
    let mut parts = Vec::new();
    for which in [Which::Upper, Which::Lower] {
        if pair.case_tag().is_finite(which) {
            parts.push(area_formula_with(&pair.graph(which), |_: &GraphPoint| 1.0, budget, seed)?);
        }
    }
    Ok(EstimateWithError::sum(&parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubspaceBudget {
    /// Outer Monte Carlo samples over the orthogonal complement of the subspace.
    pub samples: usize,
    /// Angles of the boundary polygon for two-dimensional sections.
    pub angles: usize,
    /// Polar by azimuthal grid for three-dimensional sections.
    pub polar: usize,
    pub azimuth: usize,
}

impl Default for SubspaceBudget {
    fn default() -> Self {
        Self { samples: 2000, angles: 4096, polar: 128, azimuth: 256 }
    }
}

/// Golden-section minimum of the gauge along `base + t dir`, stopping early at an
/// inside point. Returns the best `t` and whether it is inside.
fn gauge_line_min(body: &ConvexBody, base: &[f64], dir: &[f64], bound: f64) -> Result<(f64, f64, bool)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let eval = |t: f64| -> Result<(f64, bool)> {
        let x = axpy(base, t, dir);
        if body.contains(&x) {
            Ok((0.0, true))
        } else {
            Ok((body.gauge(&x, 1e-9)?, false))
        }
    };
    let (mut a, mut b) = (-bound, bound);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, ic) = eval(c)?;
    if ic {
        return Ok((c, 0.0, true));
    }
    let (mut fd, id) = eval(d)?;
    if id {
        return Ok((d, 0.0, true));
    }
    while b - a > 1e-12 * bound {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            let (v, i) = eval(c)?;
            if i {
                return Ok((c, 0.0, true));
            }
            fc = v;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            let (v, i) = eval(d)?;
            if i {
                return Ok((d, 0.0, true));
            }
            fd = v;
        }
    }
    Ok(if fc < fd { (c, fc, false) } else { (d, fd, false) })
}

/// An inside point of `y + span(frame)`, by cyclic line minimization of the gauge.
fn inside_in_affine(body: &ConvexBody, y: &[f64], frame: &[Vec<f64>]) -> Result<Option<Vec<f64>>> {
    if let OuterBound::Radius(r) = body.outer() {
        if norm(y) >= r {
            return Ok(None);
        }
    }
    // start from the projection of the interior point onto the affine subspace
    let c = body.center();
    let mut p = y.to_vec();
    for v in frame {
        crate::linalg::axpy_into(&mut p, dot(c, v), v);
    }
    if body.contains(&p) {
        return Ok(Some(p));
    }
    let bound = match body.outer() {
        OuterBound::Radius(r) => 2.0 * r + norm(&p),
        OuterBound::Unbounded { .. } => T_MAX + norm(&p),
    };
    let mut best = f64::INFINITY;
    for _sweep in 0..12 {
        let before = best;
        for v in frame {
            let (t, val, inside) = gauge_line_min(body, &p, v, bound)?;
            p = axpy(&p, t, v);
            if inside {
                return Ok(Some(p));
            }
            best = val;
        }
        if frame.len() == 1 || before - best < 1e-12 {
            break;
        }
    }
    Ok(None)
}

/// Distance from the inside point `p` to the boundary along unit `w`; `None` when the
/// ray stays inside up to the reach limit.
fn ray_exit(body: &ConvexBody, p: &[f64], w: &[f64]) -> Result<Option<f64>> {
    let far = match body.outer() {
        OuterBound::Radius(r) => r * (1.0 + 1e-9) + norm(p),
        OuterBound::Unbounded { .. } => T_MAX,
    };
    if body.contains(&axpy(p, far, w)) {
        return match body.outer() {
            OuterBound::Radius(r) => Err(Error::OracleIntegrity(format!("ray exceeds outer radius {r}"))),
            OuterBound::Unbounded { .. } => Ok(None),
        };
    }
    let (mut lo, mut hi) = (0.0, far);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * hi {
            break;
        }
        if body.contains(&axpy(p, mid, w)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// `int_{boundary of section} G_m(z) dS^{m-1}(z)` for the section `{z in F : y + z in body}`,
/// with `z` the component in `F`, restricted to `region`.
fn section_boundary_integral(
    body: &ConvexBody,
    y: &[f64],
    frame: &[Vec<f64>],
    region: Option<&(dyn Fn(&[f64]) -> bool + Sync)>,
    budget: &SubspaceBudget,
) -> Result<f64> {
    let m = frame.len();
    let Some(p_in) = inside_in_affine(body, y, frame)? else {
        return Ok(0.0);
    };
    let in_region = |x: &[f64]| region.is_none_or(|r| r(x));
    // G_m evaluated on the F-component of an ambient point
    let dens = |x: &[f64]| -> f64 {
        let r2: f64 = frame.iter().map(|v| dot(x, v).powi(2)).sum();
        density_unchecked(m, r2)
    };
    let direction = |coef: &[f64]| -> Vec<f64> {
        let mut w = vec![0.0; y.len()];
        for (c, v) in coef.iter().zip(frame) {
            crate::linalg::axpy_into(&mut w, *c, v);
        }
        w
    };
    let hit = |coef: &[f64]| -> Result<Option<Vec<f64>>> {
        let w = direction(coef);
        Ok(ray_exit(body, &p_in, &w)?.map(|r| axpy(&p_in, r, &w)))
    };
    match m {
        1 => {
            let mut s = 0.0;
            for sign in [1.0, -1.0] {
                if let Some(x) = hit(&[sign])? {
                    if in_region(&x) {
                        s += dens(&x);
                    }
                }
            }
            Ok(s)
        }
        2 => {
            let k = budget.angles.max(8);
            let pts: Vec<Option<Vec<f64>>> = (0..k)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                    hit(&[a.cos(), a.sin()])
                })
                .collect::<Result<_>>()?;
            let mut s = 0.0;
            for i in 0..k {
                if let (Some(a), Some(b)) = (&pts[i], &pts[(i + 1) % k]) {
                    let mid: Vec<f64> = a.iter().zip(b).map(|(u, v)| 0.5 * (u + v)).collect();
                    if in_region(&mid) {
                        s += dens(&mid) * crate::linalg::dist(a, b);
                    }
                }
            }
            Ok(s)
        }
        3 => {
            let (np, na) = (budget.polar.max(4), budget.azimuth.max(8));
            let pi = std::f64::consts::PI;
            let mut grid: Vec<Vec<Option<Vec<f64>>>> = Vec::with_capacity(np + 1);
            for i in 0..=np {
                let phi = pi * i as f64 / np as f64;
                let row: Vec<Option<Vec<f64>>> = if i == 0 || i == np {
                    let p = hit(&[0.0, 0.0, phi.cos()])?;
                    vec![p; na]
                } else {
                    (0..na)
                        .map(|j| {
                            let th = 2.0 * pi * j as f64 / na as f64;
                            hit(&[phi.sin() * th.cos(), phi.sin() * th.sin(), phi.cos()])
                        })
                        .collect::<Result<_>>()?
                };
                grid.push(row);
            }
            let mut s = 0.0;
            let mut tri = |a: &Vec<f64>, b: &Vec<f64>, c: &Vec<f64>| {
                let centroid: Vec<f64> = (0..a.len()).map(|t| (a[t] + b[t] + c[t]) / 3.0).collect();
                if !in_region(&centroid) {
                    return;
                }
                let e1 = crate::linalg::sub(b, a);
                let e2 = crate::linalg::sub(c, a);
                // |e1 x e2| via the Gram determinant
                let g = norm_sq(&e1) * norm_sq(&e2) - dot(&e1, &e2).powi(2);
                s += 0.5 * g.max(0.0).sqrt() * dens(&centroid);
            };
            for i in 0..np {
                for j in 0..na {
                    let jn = (j + 1) % na;
                    if let (Some(a), Some(b), Some(c), Some(d)) =
                        (&grid[i][j], &grid[i + 1][j], &grid[i + 1][jn], &grid[i][jn])
                    {
                        tri(a, b, c);
                        tri(a, c, d);
                    }
                }
            }
            Ok(s)
        }
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// Gaussian surface measure of `region ∩ boundary` relative to the subspace spanned by
/// the orthonormal `frame` (dimension 1 to 3): an outer Monte Carlo average over the
/// Gaussian law of the complement (with common random numbers across frames sharing a
/// seed) of the `G_m`-weighted boundary measure of each section.
pub fn subspace_hausdorff(
    body: &ConvexBody,
    frame: &[Vec<f64>],
    region: Option<&(dyn Fn(&[f64]) -> bool + Sync)>,
    budget: &SubspaceBudget,
    seed: u64,
) -> Result<EstimateWithError> {
    let m = frame.len();
    if !(1..=3).contains(&m) {
        return Err(Error::UnsupportedOrder(m));
    }
    let n = body.dim();
    for v in frame {
        check_dim(n, v.len())?;
    }
    if !is_orthonormal(frame, 1e-10) {
        return Err(Error::Parameter("frame must be orthonormal".into()));
    }
    if m == n {
        let v = section_boundary_integral(body, &vec![0.0; n], frame, region, budget)?;
        let nodes = match m {
            1 => 2,
            2 => budget.angles,
            _ => budget.polar * budget.azimuth,
        };
        return Ok(EstimateWithError::quadrature(v, nodes as u64));
    }
    if budget.samples < 2 {
        return Err(Error::Parameter("at least two outer samples are required".into()));
    }
    let parts = par::map_chunks(budget.samples, seed, |rng, len| -> Result<Moments> {
        let mut mo = Moments::default();
        for _ in 0..len {
            let x = normal_vec(rng, n);
            let y = project_out(&x, frame);
            mo.push(section_boundary_integral(body, &y, frame, region, budget)?);
        }
        Ok(mo)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EstimateWithError::from_moments(&Moments::merged(&parts), seed))
}

/// Coordinate frame `{e_i : i in axes}`.
pub fn coordinate_frame(n: usize, axes: &[usize]) -> Vec<Vec<f64>> {
    axes.iter().map(|&i| crate::linalg::unit(n, i)).collect()
}

/// Orthonormal frame starting with `h` and extended by `extra` further directions.
pub fn frame_containing(h: &[f64], extra: usize) -> Vec<Vec<f64>> {
    let n = h.len();
    let mut f = vec![h.to_vec()];
    let rest = complement_basis(n, &f);
    f.extend(rest.into_iter().take(extra));
    f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentRow {
    pub epsilon: f64,
    pub value: f64,
    pub std_error: f64,
}

/// Minkowski-content perimeter estimate with its extrapolation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiContent {
    /// Extrapolated value; `std_error` combines the statistical and extrapolation parts.
    pub estimate: EstimateWithError,
    pub statistical_se: f64,
    pub extrapolation_error: f64,
    /// `(gamma(body_eps) - gamma(body)) / eps` per epsilon, in the given order.
    pub table: Vec<ContentRow>,
    pub warnings: Vec<String>,
}

/// Lagrange weights of the polynomial through `(eps_i, v_i)` evaluated at 0.
fn weights_at_zero(eps: &[f64]) -> Vec<f64> {
    (0..eps.len())
        .map(|i| {
            eps.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &e)| e / (e - eps[i]))
                .product()
        })
        .collect()
}

/// `lim (gamma(body_eps) - gamma(body)) / eps` by Monte Carlo with common random
/// numbers across `epsilons`, extrapolated quadratically through the three smallest
/// epsilons. The gap to the linear extrapolation through the two smallest serves as
/// the extrapolation error. Distances are exact per shape.
pub fn minkowski_content_perimeter(
    body: &ConvexBody,
    epsilons: &[f64],
    samples: usize,
    seed: u64,
) -> Result<MinkowskiContent> {
    let k = epsilons.len();
    if k < 3 {
        return Err(Error::Parameter("at least three epsilons are required".into()));
    }
    if epsilons.iter().any(|e| !(*e > 0.0 && *e <= 0.1)) {
        return Err(Error::Parameter("epsilons must lie in (0, 0.1]".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("epsilons must be strictly decreasing".into()));
    }
    if samples < 2 {
        return Err(Error::Parameter("at least two samples are required".into()));
    }
    let n = body.dim();
    let eps_max = epsilons[0];
    let quad = weights_at_zero(&epsilons[k - 3..]);
    let lin = weights_at_zero(&epsilons[k - 2..]);
    let parts = par::map_chunks(samples, seed, |rng, len| -> Result<Vec<Moments>> {
        // columns: k table entries, quadratic, linear
        let mut acc = vec![Moments::default(); k + 2];
        let mut row = vec![0.0; k];
        for _ in 0..len {
            let x = normal_vec(rng, n);
            let d = body.distance_within(&x, eps_max)?;
            for (i, e) in epsilons.iter().enumerate() {
                row[i] = match d {
                    Some(d) if d > 0.0 && d < *e => 1.0 / e,
                    _ => 0.0,
                };
                acc[i].push(row[i]);
            }
            acc[k].push(quad.iter().zip(&row[k - 3..]).map(|(w, v)| w * v).sum());
            acc[k + 1].push(lin.iter().zip(&row[k - 2..]).map(|(w, v)| w * v).sum());
        }
        Ok(acc)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    let column = |c: usize| Moments::merged(parts.iter().map(|p| &p[c]));
    let table: Vec<ContentRow> = (0..k)
        .map(|i| {
            let m = column(i);
            ContentRow { epsilon: epsilons[i], value: m.mean, std_error: m.std_error() }
        })
        .collect();
    let q = column(k);
    let l = column(k + 1);
    let extrapolation_error = (q.mean - l.mean).abs();
    let statistical_se = q.std_error();
    let mut warnings = Vec::new();
    let mut up = false;
    let mut down = false;
    for w in table.windows(2) {
        let diff = w[1].value - w[0].value;
        let noise = 3.0 * (w[0].std_error + w[1].std_error);
        up |= diff > noise;
        down |= diff < -noise;
    }
    if up && down {
        warnings.push("extrapolation table is not monotone beyond noise".to_string());
    }
    let estimate = EstimateWithError {
        value: q.mean,
        std_error: statistical_se.hypot(extrapolation_error),
        n_samples: samples as u64,
        seed,
        method: crate::estimate::Method::MonteCarlo,
    };
    Ok(MinkowskiContent { estimate, statistical_se, extrapolation_error, table, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_space::Direction;
    use crate::graph::ExplicitGraph;

    const G1_1: f64 = 0.241_970_724_519_143_37;

    #[test]
    fn richardson_weights() {
        let w = weights_at_zero(&[0.1, 0.05, 0.025]);
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-12 && (w[1] + 2.0).abs() < 1e-12 && (w[2] - 8.0 / 3.0).abs() < 1e-12);
        let w = weights_at_zero(&[0.05, 0.025]);
        assert!((w[0] + 1.0).abs() < 1e-12 && (w[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn flat_graph_through_origin() {
        let m = GaussianModel::new(3).unwrap();
        let g = ExplicitGraph::affine(Direction::axis(3, 0), &[0.0; 3], 0.0).unwrap();
        let e = epigraph_perimeter(&g, &m, &Budget::default(), 0).unwrap();
        assert!((e.value - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12, "{e:?}");
        let g = ExplicitGraph::affine(Direction::axis(3, 0), &[0.0; 3], 1.0).unwrap();
        let e = epigraph_perimeter(&g, &m, &Budget::default(), 0).unwrap();
        assert!((e.value - G1_1).abs() < 1e-12);
    }

    #[test]
    fn ball_upper_graph() {
        let m = GaussianModel::new(2).unwrap();
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let pair = GraphPair::new(&ball, Direction::axis(2, 1)).unwrap();
        let e = area_formula_integral(&pair, Which::Upper, &|_| 1.0, &m, &Budget::default(), 0).unwrap();
        let target = (-0.5f64).exp() / 2.0;
        assert!((e.value - target).abs() < 1e-4 * target, "{} vs {target}", e.value);
    }

    #[test]
    fn subspace_examples() {
        let half = ConvexBody::halfspace(vec![1.0, 0.0, 0.0], 1.0).unwrap();
        let b = SubspaceBudget { samples: 200, ..Default::default() };
        let e = subspace_hausdorff(&half, &coordinate_frame(3, &[0]), None, &b, 1).unwrap();
        assert!((e.value - G1_1).abs() < 1e-12, "{e:?}");
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let e = subspace_hausdorff(&ball, &coordinate_frame(2, &[0, 1]), None, &b, 1).unwrap();
        assert!((e.value - (-0.5f64).exp()).abs() < 1e-5, "{e:?}");
        let ball3 = ConvexBody::ball(3, 1.0).unwrap();
        let e = subspace_hausdorff(&ball3, &coordinate_frame(3, &[0, 1, 2]), None, &b, 1).unwrap();
        // 4 pi G_3(1)
        let target = 4.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI).powf(-1.5) * (-0.5f64).exp();
        assert!((e.value - target).abs() < 1e-3 * target, "{e:?} {target}");
        assert!(matches!(
            subspace_hausdorff(&ball3, &vec![vec![1.0, 0.0, 0.0]; 4], None, &b, 1),
            Err(Error::UnsupportedOrder(4))
        ));
    }

    #[test]
    fn halfspace_content() {
        let half = ConvexBody::halfspace(vec![1.0, 0.0], 1.0).unwrap();
        let c = minkowski_content_perimeter(&half, &[0.1, 0.05, 0.025], 1_000_000, 3).unwrap();
        assert!((c.estimate.value - G1_1).abs() < 3.0 * c.estimate.std_error + 1e-3, "{c:?}");
        assert!(c.warnings.is_empty());
        assert!(minkowski_content_perimeter(&half, &[0.1, 0.05], 10, 3).is_err());
        assert!(minkowski_content_perimeter(&half, &[0.05, 0.1, 0.01], 10, 3).is_err());
    }
}
