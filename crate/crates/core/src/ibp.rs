//! Numerical checks of Gaussian integration by parts on convex sets:
//!
//! `int_body d*_k psi dgamma = int_{boundary} psi <n, k> G dS`,
//!
//! with the volume side sampled by rejection and the surface side assembled from the
//! upper and lower graphs along a direction `h`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::convex_body::ConvexBody;
use crate::error::{check_dim, Error, Result};
use crate::estimate::EstimateWithError;
use crate::gaussian_space::{normal_vec, Direction, GaussianModel, TestFunction, DEFAULT_FD_STEP};
use crate::graph::{
    boundary_classify, choose_direction, default_candidates, graph_value_and_gradient, require_transverse,
    BoundaryClass, CaseTag, GraphFunction, GraphPair, Which, GRAPH_FD_STEP,
};
use crate::linalg::{dot, norm, norm_sq, scale, sub};
use crate::par;
use crate::surface::{area_formula_with, Budget, GraphPoint, VERTICAL_THRESHOLD};

/// Minimum Gaussian mass of the body for rejection sampling.
pub const MIN_MASS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// `inconclusive` when the tolerance exceeds a quarter of the compared magnitudes
/// (floored at 0.01), otherwise `pass` iff the difference is within tolerance.
pub fn verdict(lhs: f64, rhs: f64, tolerance: f64) -> Verdict {
    let scale = lhs.abs().max(rhs.abs()).max(0.01);
    if !tolerance.is_finite() || tolerance > 0.25 * scale {
        Verdict::Inconclusive
    } else if (lhs - rhs).abs() <= tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub body: String,
    pub psi: String,
    pub k: Vec<f64>,
    pub h: Vec<f64>,
    pub dim: usize,
    pub seeds: Vec<u64>,
    /// Named partial results, such as the per-graph surface terms.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub terms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lhs: EstimateWithError,
    pub rhs: EstimateWithError,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub metadata: ReportMetadata,
}

impl VerificationReport {
    /// Tolerance defaults to `3 (se_lhs + se_rhs)`.
    pub fn new(lhs: EstimateWithError, rhs: EstimateWithError, tolerance: Option<f64>, metadata: ReportMetadata) -> Self {
        let tolerance = tolerance.unwrap_or(3.0 * (lhs.std_error + rhs.std_error));
        let abs_diff = (lhs.value - rhs.value).abs();
        Self { lhs, rhs, abs_diff, tolerance, verdict: verdict(lhs.value, rhs.value, tolerance), metadata }
    }
}

/// `int_body (d_k psi - psi <k, x>) dgamma` by Monte Carlo: standard Gaussian draws,
/// integrand zero outside the body. A pre-flight of `10^4` draws rejects bodies with
/// Gaussian mass below [`MIN_MASS`].
pub fn lhs_volume_integral(
    body: &ConvexBody,
    psi: &TestFunction,
    k: &Direction,
    model: &GaussianModel,
    samples: usize,
    seed: u64,
) -> Result<EstimateWithError> {
    let n = model.dim();
    check_dim(n, body.dim())?;
    check_dim(n, k.dim())?;
    if samples < 2 {
        return Err(Error::Parameter("at least two samples are required".into()));
    }
    let pre = par::monte_carlo(10_000, par::derive_seed(seed, "preflight"), |rng| {
        if body.contains(&normal_vec(rng, n)) {
            1.0
        } else {
            0.0
        }
    });
    if pre.mean < MIN_MASS {
        return Err(Error::Mass { mass: pre.mean, threshold: MIN_MASS });
    }
    let kv = k.as_slice();
    let m = par::monte_carlo(samples, seed, |rng| {
        let x = normal_vec(rng, n);
        if body.contains(&x) {
            psi.directional_derivative(&x, kv, DEFAULT_FD_STEP) - psi.value(&x) * dot(kv, &x)
        } else {
            0.0
        }
    });
    Ok(EstimateWithError::from_moments(&m, seed))
}

/// How the surface integrand `psi <n, k>` obtains the outward normal `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsRoute {
    /// `n = nu_f` on the upper graph and `-nu_g` on the lower one, with
    /// `nu = (-grad + h) / sqrt(1 + |grad|^2)`.
    GraphNormal,
    /// `n = grad p / |grad p|` from the closed-form gauge gradient on each graph.
    GaugeFormula,
}

/// `(-grad f + h) / (f - t0 - <grad f, y - y0>)` on the upper graph and
/// `(grad g - h) / (<grad g, y - y0> - (g - t0))` on the lower graph, where
/// `x0 = y0 + t0 h` is the interior point. Returns the gradient and the denominator.
pub fn gauge_gradient_formula(pair: &GraphPair, which: Which, y: &[f64], value: f64, gradient: &[f64]) -> (Vec<f64>, f64) {
    let h = pair.graph(which).direction().to_vec();
    let y0 = pair.graph(which).anchor().to_vec();
    let t0 = pair.center_height();
    let slope = dot(gradient, &sub(y, &y0));
    match which {
        Which::Upper => {
            let num: Vec<f64> = gradient.iter().zip(&h).map(|(g, hi)| hi - g).collect();
            let den = value - t0 - slope;
            (scale(&num, 1.0 / den), den)
        }
        Which::Lower => {
            let num: Vec<f64> = gradient.iter().zip(&h).map(|(g, hi)| g - hi).collect();
            let den = slope - (value - t0);
            (scale(&num, 1.0 / den), den)
        }
    }
}

/// `nu = (-grad + h) / sqrt(1 + |grad|^2)`.
pub fn graph_normal(h: &[f64], gradient: &[f64]) -> Vec<f64> {
    let s = 1.0 / (1.0 + norm_sq(gradient)).sqrt();
    gradient.iter().zip(h).map(|(g, hi)| s * (hi - g)).collect()
}

/// `int_{graph} psi [nu, k] dS` for one graph (no orientation sign applied).
fn graph_term(pair: &GraphPair, which: Which, psi: &TestFunction, k: &Direction, budget: &Budget, seed: u64) -> Result<EstimateWithError> {
    let graph = pair.graph(which);
    let h = graph.direction().to_vec();
    let kv = k.as_slice();
    area_formula_with(&graph, |p: &GraphPoint| psi.value(p.x) * dot(&graph_normal(&h, p.gradient), kv), budget, seed)
}

/// `int_{graph} psi <grad p / |grad p|, k> dS` for one graph via the gauge formula.
fn gauge_term(pair: &GraphPair, which: Which, psi: &TestFunction, k: &Direction, budget: &Budget, seed: u64) -> Result<EstimateWithError> {
    let graph = pair.graph(which);
    let kv = k.as_slice();
    let e = area_formula_with(
        &graph,
        |p: &GraphPoint| {
            let (g, den) = gauge_gradient_formula(pair, which, p.y, p.height, p.gradient);
            if den <= 0.0 {
                return f64::NAN;
            }
            psi.value(p.x) * dot(&g, kv) / norm(&g)
        },
        budget,
        seed,
    )?;
    if e.value.is_nan() {
        return Err(Error::Degeneracy(0.0));
    }
    Ok(e)
}

fn check_pair(body: &ConvexBody, pair: &GraphPair, k: &Direction) -> Result<()> {
    check_dim(body.dim(), pair.body().dim())?;
    check_dim(body.dim(), k.dim())?;
    if pair.case_tag() == CaseTag::BothInfinite {
        return Err(Error::Direction("every line along h is inside the body; choose a different h".into()));
    }
    Ok(())
}

/// The surface side split by graph, with the orientation signs applied: the total is
/// `upper + lower`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSide {
    pub upper: Option<EstimateWithError>,
    pub lower: Option<EstimateWithError>,
    pub total: EstimateWithError,
}

/// `int_{boundary} psi <n, k> G dS` along the chosen route, after rejecting `h` when
/// the vertical part carries more than [`VERTICAL_THRESHOLD`] of the surface mass.
pub fn rhs_surface_integral_via(
    body: &ConvexBody,
    pair: &GraphPair,
    psi: &TestFunction,
    k: &Direction,
    budget: &Budget,
    seed: u64,
    route: RhsRoute,
) -> Result<SurfaceSide> {
    check_pair(body, pair, k)?;
    let h = pair.graph(Which::Upper).direction().clone();
    require_transverse(body, &h, budget.vertical_samples, par::derive_seed(seed, "vertical"), VERTICAL_THRESHOLD)?;
    let side = |which: Which| -> Result<Option<EstimateWithError>> {
        if !pair.case_tag().is_finite(which) {
            return Ok(None);
        }
        Ok(Some(match route {
            RhsRoute::GaugeFormula => gauge_term(pair, which, psi, k, budget, seed)?,
            RhsRoute::GraphNormal => {
                let e = graph_term(pair, which, psi, k, budget, seed)?;
                match which {
                    Which::Upper => e,
                    Which::Lower => EstimateWithError { value: -e.value, ..e },
                }
            }
        }))
    };
    let upper = side(Which::Upper)?;
    let lower = side(Which::Lower)?;
    let parts: Vec<EstimateWithError> = upper.iter().chain(lower.iter()).copied().collect();
    Ok(SurfaceSide { upper, lower, total: EstimateWithError::sum(&parts) })
}

/// `int_{Gamma(f)} psi [nu_f, k] dS - int_{Gamma(g)} psi [nu_g, k] dS`.
pub fn rhs_surface_integral(
    body: &ConvexBody,
    pair: &GraphPair,
    psi: &TestFunction,
    k: &Direction,
    budget: &Budget,
    seed: u64,
) -> Result<EstimateWithError> {
    Ok(rhs_surface_integral_via(body, pair, psi, k, budget, seed, RhsRoute::GraphNormal)?.total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IbpConfig {
    /// Monte Carlo samples for the volume side.
    pub samples: usize,
    pub budget: Budget,
    /// Decomposition direction; chosen among `candidates` when absent.
    pub h: Option<Vec<f64>>,
    /// Candidate directions; coordinate axes plus 8 random unit vectors when absent.
    pub candidates: Option<Vec<Vec<f64>>>,
    pub boundary_samples: usize,
    pub seed: u64,
    /// Overrides `3 (se_lhs + se_rhs)`.
    pub tolerance: Option<f64>,
}

impl Default for IbpConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            budget: Budget::default(),
            h: None,
            candidates: None,
            boundary_samples: 1000,
            seed: 0,
            tolerance: None,
        }
    }
}

impl IbpConfig {
    /// The pinned direction or the best candidate by vertical mass.
    pub fn direction(&self, body: &ConvexBody) -> Result<Direction> {
        if let Some(h) = &self.h {
            let d = Direction::new(h.clone())?;
            check_dim(body.dim(), d.dim())?;
            return Ok(d);
        }
        let candidates = match &self.candidates {
            Some(c) => c.iter().map(|v| Direction::new(v.clone())).collect::<Result<Vec<_>>>()?,
            None => default_candidates(body.dim(), 8, par::derive_seed(self.seed, "candidates")),
        };
        let (h, _) = choose_direction(body, &candidates, self.boundary_samples, par::derive_seed(self.seed, "direction"))?;
        Ok(h)
    }
}

fn metadata(body: &ConvexBody, psi: &TestFunction, k: &Direction, h: &Direction, seeds: Vec<u64>) -> ReportMetadata {
    ReportMetadata {
        body: body.shape_tag().to_string(),
        psi: psi.id(),
        k: k.to_vec(),
        h: h.to_vec(),
        dim: body.dim(),
        seeds,
        terms: BTreeMap::new(),
    }
}

/// Both sides of the integration-by-parts identity and their comparison.
pub fn verify_ibp(body: &ConvexBody, psi: &TestFunction, k: &Direction, config: &IbpConfig) -> Result<VerificationReport> {
    let model = GaussianModel::new(body.dim())?;
    let h = config.direction(body)?;
    let pair = GraphPair::new(body, h.clone())?;
    let lhs = lhs_volume_integral(body, psi, k, &model, config.samples, config.seed)?;
    let rhs_seed = par::derive_seed(config.seed, "rhs");
    let side = rhs_surface_integral_via(body, &pair, psi, k, &config.budget, rhs_seed, RhsRoute::GraphNormal)?;
    let mut meta = metadata(body, psi, k, &h, vec![config.seed, rhs_seed]);
    if let Some(u) = side.upper {
        meta.terms.insert("upper".into(), u.value);
    }
    if let Some(l) = side.lower {
        meta.terms.insert("lower".into(), l.value);
    }
    Ok(VerificationReport::new(lhs, side.total, config.tolerance, meta))
}

/// The identity written with the vector measure
/// `D 1_body = -nu_f S|Gamma(f) + nu_g S|Gamma(g)`:
/// `int d*_k phi dgamma = -int phi d[D 1_body, k]`, assembled from the two graph
/// integrals without orientation signs.
pub fn vector_measure_check(
    body: &ConvexBody,
    pair: &GraphPair,
    phi: &TestFunction,
    k: &Direction,
    config: &IbpConfig,
) -> Result<VerificationReport> {
    check_pair(body, pair, k)?;
    let model = GaussianModel::new(body.dim())?;
    let h = pair.graph(Which::Upper).direction().clone();
    let rhs_seed = par::derive_seed(config.seed, "rhs");
    require_transverse(body, &h, config.budget.vertical_samples, par::derive_seed(rhs_seed, "vertical"), VERTICAL_THRESHOLD)?;
    let lhs = lhs_volume_integral(body, phi, k, &model, config.samples, config.seed)?;
    let mut meta = metadata(body, phi, k, &h, vec![config.seed, rhs_seed]);
    let mut parts = Vec::new();
    if pair.case_tag().is_finite(Which::Upper) {
        let a = graph_term(pair, Which::Upper, phi, k, &config.budget, rhs_seed)?;
        meta.terms.insert("upper_nu_k".into(), a.value);
        // -nu_f component
        parts.push(EstimateWithError { value: -a.value, ..a });
    }
    if pair.case_tag().is_finite(Which::Lower) {
        let b = graph_term(pair, Which::Lower, phi, k, &config.budget, rhs_seed)?;
        meta.terms.insert("lower_nu_k".into(), b.value);
        parts.push(b);
    }
    let measure = EstimateWithError::sum(&parts);
    meta.terms.insert("measure_k".into(), measure.value);
    let rhs = EstimateWithError { value: -measure.value, ..measure };
    Ok(VerificationReport::new(lhs, rhs, config.tolerance, meta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub class: BoundaryClass,
    pub formula: Vec<f64>,
    pub finite_difference: Vec<f64>,
    pub denominator: f64,
    /// `|formula - fd| / |fd|`
    pub relative_error: f64,
    /// Distance between the normalized formula and `nu_f` (upper) or `-nu_g` (lower).
    pub normal_error: f64,
}

/// Compares the closed-form gauge gradient on a graph with central differences of the
/// bisection gauge at the boundary point `x`.
pub fn gradient_formula_check(body: &ConvexBody, pair: &GraphPair, x: &[f64], tol: f64) -> Result<GradientCheck> {
    check_dim(body.dim(), x.len())?;
    let class = boundary_classify(body, pair, x, tol)?;
    let which = match class {
        BoundaryClass::UpperGraph => Which::Upper,
        BoundaryClass::LowerGraph => Which::Lower,
        BoundaryClass::Vertical => {
            return Err(Error::Classification("point lies on the vertical part; no graph formula".into()))
        }
    };
    let h = pair.graph(which).direction().to_vec();
    let t = dot(&h, x);
    let y: Vec<f64> = x.iter().zip(&h).map(|(a, b)| a - t * b).collect();
    let (value, grad) = graph_value_and_gradient(pair, which, &y, GRAPH_FD_STEP)?;
    let (formula, den) = gauge_gradient_formula(pair, which, &y, value, &grad);
    if den.abs() < 1e-8 {
        return Err(Error::Degeneracy(den));
    }
    let fd = body.gauge_gradient_fd(x, 1e-4, 1e-12)?;
    let relative_error = norm(&sub(&formula, &fd)) / norm(&fd);
    let nu = graph_normal(&h, &grad);
    let expected = match which {
        Which::Upper => nu,
        Which::Lower => scale(&nu, -1.0),
    };
    let normal_error = norm(&sub(&scale(&formula, 1.0 / norm(&formula)), &expected));
    Ok(GradientCheck { class, formula, finite_difference: fd, denominator: den, relative_error, normal_error })
}
