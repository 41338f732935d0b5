//! The subcommands. Each returns an [`Outcome`] and leaves writing to the caller.

use std::time::Instant;

use clap::ValueEnum;

use cvxgauss::graph::{boundary_samples, default_candidates, GraphPair};
use cvxgauss::ibp::{gradient_formula_check, lhs_volume_integral, vector_measure_check, verify_ibp};
use cvxgauss::par::derive_seed;
use cvxgauss::surface::{
    coordinate_frame, frame_containing, minkowski_content_perimeter, subspace_hausdorff, total_boundary_measure,
    SubspaceBudget,
};
use cvxgauss::{ConvexBody, Direction, Error, EstimateWithError, GaussianModel, IbpConfig};

use crate::config::RunConfig;
use crate::report::{Outcome, ResultRow, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Area formula against Minkowski content.
    Perimeter,
    /// Both sides of the integration-by-parts identity for every `k`.
    Ibp,
    /// Subspace surface measures against the area formula.
    Surface,
    /// Closed-form gauge gradient against finite differences at boundary points.
    Gradcheck,
    ConvergeDim,
    ConvergeSubspace,
    ConvergeSamples,
    ConvergeEpsilon,
    /// Lebesgue density at boundary points.
    Density,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match command {
        Command::Perimeter => perimeter(cfg, &mut out)?,
        Command::Ibp => ibp(cfg, &mut out)?,
        Command::Surface => surface(cfg, &mut out, true)?,
        Command::ConvergeSubspace => surface(cfg, &mut out, false)?,
        Command::Gradcheck => gradcheck(cfg, &mut out)?,
        Command::ConvergeDim => converge_dim(cfg, &mut out)?,
        Command::ConvergeSamples => converge_samples(cfg, &mut out)?,
        Command::ConvergeEpsilon => converge_epsilon(cfg, &mut out)?,
        Command::Density => density(cfg, &mut out)?,
    }
    Ok(out)
}

fn timed<T>(out: &mut Outcome, name: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let v = f();
    out.timing.push((name.to_string(), t.elapsed().as_secs_f64()));
    v
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn pair_for(cfg: &RunConfig, body: &ConvexBody) -> Result<GraphPair, CliError> {
    let h = cfg.ibp().direction(body)?;
    Ok(GraphPair::new(body, h)?)
}

fn h_of(pair: &GraphPair) -> Vec<f64> {
    use cvxgauss::graph::{GraphFunction, Which};
    pair.graph(Which::Upper).direction().to_vec()
}

/// `max(3 (se_l + se_r), rel * |rhs|)` unless configured.
fn comparison_tol(cfg: &RunConfig, a: &EstimateWithError, b: &EstimateWithError, rel: f64) -> f64 {
    cfg.budgets.tolerance.unwrap_or((3.0 * (a.std_error + b.std_error)).max(rel * b.value.abs()))
}

fn perimeter(cfg: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let body = cfg.body()?;
    let pair = pair_for(cfg, &body)?;
    let budget = cfg.budgets.surface();
    let area = timed(out, "area_formula", || total_boundary_measure(&body, &pair, &budget, derive_seed(cfg.seed, "surface")))?;
    let content = timed(out, "minkowski_content", || {
        minkowski_content_perimeter(&body, &cfg.budgets.epsilons, cfg.budgets.content_samples, derive_seed(cfg.seed, "content"))
    })?;
    let tol = comparison_tol(cfg, &area, &content.estimate, 0.02);
    out.results.push(ResultRow::equal("perimeter", &area, &content.estimate, tol));
    let mut t = Table::new("perimeter", &["method", "value", "std_error"]);
    t.push(vec!["area_formula".into(), num(area.value), num(area.std_error)]);
    t.push(vec!["minkowski_content".into(), num(content.estimate.value), num(content.estimate.std_error)]);
    out.tables.push(t);
    out.tables.push(content_table("minkowski_content", &content));
    out.warnings.extend(content.warnings);
    Ok(())
}

fn content_table(name: &str, c: &cvxgauss::surface::MinkowskiContent) -> Table {
    let mut t = Table::new(name, &["epsilon", "value", "std_error"]);
    for r in &c.table {
        t.push(vec![num(r.epsilon), num(r.value), num(r.std_error)]);
    }
    t.push(vec![num(0.0), num(c.estimate.value), num(c.estimate.std_error)]);
    t
}

fn ibp(cfg: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let body = cfg.body()?;
    let psi = cfg.psi();
    let ks = cfg.ks()?;
    let icfg: IbpConfig = cfg.ibp();
    let h = Direction::new(icfg.direction(&body)?.to_vec())?;
    let icfg = IbpConfig { h: Some(h.to_vec()), ..icfg };
    let pair = GraphPair::new(&body, h)?;
    let mut t = Table::new("ibp", &["check", "k", "lhs", "se_lhs", "rhs", "se_rhs", "verdict"]);
    for (i, k) in ks.iter().enumerate() {
        let name = format!("ibp[k{i}]");
        let r = timed(out, &name, || verify_ibp(&body, &psi, k, &icfg))?;
        t.push(row_of("ibp", k, &r));
        out.results.push(ResultRow::from_report(name, &r));
        if cfg.budgets.vector_measure {
            let name = format!("vector_measure[k{i}]");
            let r = timed(out, &name, || vector_measure_check(&body, &pair, &psi, k, &icfg))?;
            t.push(row_of("vector_measure", k, &r));
            out.results.push(ResultRow::from_report(name, &r));
        }
    }
    out.tables.push(t);
    Ok(())
}

fn row_of(check: &str, k: &Direction, r: &cvxgauss::VerificationReport) -> Vec<String> {
    let k = k.as_slice().iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ");
    vec![
        check.into(),
        k,
        num(r.lhs.value),
        num(r.lhs.std_error),
        num(r.rhs.value),
        num(r.rhs.std_error),
        format!("{:?}", r.verdict).to_lowercase(),
    ]
}

/// Nested frames: configured coordinate frames, or frames of dimension 1 to
/// `min(n, 3)` through `h`.
fn frames(cfg: &RunConfig, h: &[f64]) -> Vec<(String, Vec<Vec<f64>>)> {
    let n = cfg.model.dim;
    if cfg.study.frames.is_empty() {
        (1..=n.min(3)).map(|m| (format!("h+{}", m - 1), frame_containing(h, m - 1))).collect()
    } else {
        cfg.study
            .frames
            .iter()
            .map(|axes| {
                let label = axes.iter().map(|a| format!("e{}", a + 1)).collect::<Vec<_>>().join("+");
                (label, coordinate_frame(n, axes))
            })
            .collect()
    }
}

fn surface(cfg: &RunConfig, out: &mut Outcome, compare_area: bool) -> Result<(), CliError> {
    let body = cfg.body()?;
    let n = cfg.model.dim;
    let pair = pair_for(cfg, &body)?;
    let h = h_of(&pair);
    let sb = SubspaceBudget { samples: cfg.budgets.subspace_samples, ..SubspaceBudget::default() };
    // Same seed for every frame: common random numbers.
    let seed = derive_seed(cfg.seed, "subspace");
    let mut t = Table::new("subspace", &["frame", "dim", "value", "std_error", "seconds"]);
    let mut values: Vec<(String, usize, EstimateWithError)> = Vec::new();
    for (label, frame) in frames(cfg, &h) {
        let start = Instant::now();
        let e = subspace_hausdorff(&body, &frame, None, &sb, seed)?;
        let secs = start.elapsed().as_secs_f64();
        out.timing.push((format!("subspace[{label}]"), secs));
        t.push(vec![label.clone(), frame.len().to_string(), num(e.value), num(e.std_error), num(secs)]);
        values.push((label, frame.len(), e));
    }
    for w in values.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let tol = cfg.budgets.tolerance.unwrap_or(3.0 * (a.2.std_error + b.2.std_error) + 1e-9 * b.2.value.abs());
        out.results.push(ResultRow::at_most(format!("monotone[{}<={}]", a.0, b.0), &a.2, &b.2, tol));
    }
    out.tables.push(t);
    if compare_area {
        let area = timed(out, "area_formula", || {
            total_boundary_measure(&body, &pair, &cfg.budgets.surface(), derive_seed(cfg.seed, "surface"))
        })?;
        if let Some((label, m, top)) = values.last() {
            if *m == n {
                let tol = comparison_tol(cfg, top, &area, 1e-3);
                out.results.push(ResultRow::equal(format!("subspace[{label}]=area_formula"), top, &area, tol));
            } else {
                let tol = cfg.budgets.tolerance.unwrap_or(3.0 * (top.std_error + area.std_error) + 1e-3 * area.value);
                out.results.push(ResultRow::at_most(format!("subspace[{label}]<=area_formula"), top, &area, tol));
            }
        }
    }
    Ok(())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn gradcheck(cfg: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let body = cfg.body()?;
    let pair = pair_for(cfg, &body)?;
    let pts = boundary_samples(&body, cfg.budgets.boundary_points, derive_seed(cfg.seed, "gradcheck"))?;
    let n = cfg.model.dim;
    let mut header: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
    header.extend(["class", "relative_error", "normal_error", "denominator"].map(String::from));
    let mut t = Table { name: "gradcheck".into(), header, rows: Vec::new() };
    let (mut rel, mut normal, mut skipped) = (Vec::new(), Vec::new(), 0usize);
    for s in pts.iter().filter(|s| !s.point.is_empty()) {
        match gradient_formula_check(&body, &pair, &s.point, cvxgauss::convex_body::DEFAULT_TOL) {
            Ok(c) => {
                let mut row: Vec<String> = s.point.iter().map(|v| num(*v)).collect();
                row.extend([
                    format!("{:?}", c.class),
                    num(c.relative_error),
                    num(c.normal_error),
                    num(c.denominator),
                ]);
                t.push(row);
                rel.push(c.relative_error);
                normal.push(c.normal_error);
            }
            Err(Error::Classification(_) | Error::Margin(_) | Error::Degeneracy(_)) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if rel.is_empty() {
        return Err(CliError::Core(Error::Classification("no boundary point admits a graph formula".into())));
    }
    if skipped > 0 {
        out.warnings.push(format!("gradcheck: skipped {skipped} boundary points (vertical, degenerate or near the rim)"));
    }
    let max_normal = normal.iter().cloned().fold(0.0, f64::max);
    out.results.push(ResultRow::threshold("gradcheck_median_relative_error", median(&mut rel), 1e-3));
    out.results.push(ResultRow::threshold("gradcheck_max_normal_error", max_normal, 1e-6));
    out.tables.push(t);
    Ok(())
}

fn converge_dim(cfg: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let dims = if cfg.study.dims.is_empty() { vec![1, 2, 3, 4] } else { cfg.study.dims.clone() };
    let mut t = Table::new("converge_dim", &["dim", "value", "std_error", "method", "difference", "seconds"]);
    let mut prev: Option<f64> = None;
    for n in dims {
        // The spectral profile, if any, belongs to the configured dimension only.
        let model = GaussianModel::new(n)?;
        let body = cfg.body.build(&model, "body")?;
        let candidates = default_candidates(n, 8, derive_seed(cfg.seed, "candidates"));
        let icfg = IbpConfig { h: None, candidates: Some(candidates.iter().map(|d| d.to_vec()).collect()), ..cfg.ibp() };
        let pair = GraphPair::new(&body, icfg.direction(&body)?)?;
        let start = Instant::now();
        let e = total_boundary_measure(&body, &pair, &cfg.budgets.surface(), derive_seed(cfg.seed, "surface"))?;
        let secs = start.elapsed().as_secs_f64();
        out.timing.push((format!("dim[{n}]"), secs));
        let diff = prev.map(|p| e.value - p).unwrap_or(f64::NAN);
        t.push(vec![n.to_string(), num(e.value), num(e.std_error), format!("{:?}", e.method), num(diff), num(secs)]);
        prev = Some(e.value);
    }
    out.tables.push(t);
    Ok(())
}

fn converge_samples(cfg: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let grid = if cfg.study.sample_grid.is_empty() {
        vec![10_000, 40_000, 160_000, 640_000]
    } else {
        cfg.study.sample_grid.clone()
    };
    let body = cfg.body()?;
    let model = cfg.model()?;
    let psi = cfg.psi();
    let k = cfg.ks()?.remove(0);
    let mut t = Table::new("converge_samples", &["samples", "value", "std_error", "se_sqrt_n", "seconds"]);
    let mut scaled = Vec::new();
    for s in grid {
        let start = Instant::now();
        let e = lhs_volume_integral(&body, &psi, &k, &model, s, cfg.seed)?;
        let secs = start.elapsed().as_secs_f64();
        out.timing.push((format!("samples[{s}]"), secs));
        let r = e.std_error * (s as f64).sqrt();
        scaled.push(r);
        t.push(vec![s.to_string(), num(e.value), num(e.std_error), num(r), num(secs)]);
    }
    let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
    let spread = scaled.iter().map(|r| (r / mean - 1.0).abs()).fold(0.0, f64::max);
    out.results.push(ResultRow::threshold("se_sqrt_n_spread", spread, 0.2));
    out.tables.push(t);
    Ok(())
}

fn converge_epsilon(cfg: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let grid = if cfg.study.epsilon_grid.is_empty() {
        vec![0.08, 0.04, 0.02, 0.01, 0.005]
    } else {
        cfg.study.epsilon_grid.clone()
    };
    let body = cfg.body()?;
    let c = timed(out, "minkowski_content", || {
        minkowski_content_perimeter(&body, &grid, cfg.budgets.content_samples, derive_seed(cfg.seed, "content"))
    })?;
    out.tables.push(content_table("converge_epsilon", &c));
    out.warnings.extend(c.warnings);
    Ok(())
}

fn density(cfg: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let body = cfg.body()?;
    let pts = boundary_samples(&body, cfg.budgets.boundary_points, derive_seed(cfg.seed, "density"))?;
    let n = cfg.model.dim;
    let mut header: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
    header.extend(["density", "std_error"].map(String::from));
    let mut t = Table { name: "density".into(), header, rows: Vec::new() };
    let mut violations = 0usize;
    for (i, s) in pts.iter().filter(|s| !s.point.is_empty()).enumerate() {
        let d = body.lebesgue_density(&s.point, cfg.budgets.density_radius, cfg.budgets.density_samples, derive_seed(cfg.seed, &format!("density{i}")))?;
        if !(d.value - 3.0 * d.std_error > 0.0 && d.value + 3.0 * d.std_error < 1.0) {
            violations += 1;
        }
        let mut row: Vec<String> = s.point.iter().map(|v| num(*v)).collect();
        row.extend([num(d.value), num(d.std_error)]);
        t.push(row);
    }
    out.results.push(ResultRow::threshold("density_outside_open_unit_interval", violations as f64, 0.0));
    out.tables.push(t);
    Ok(())
}
