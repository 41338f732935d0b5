//! Run configuration: JSON or TOML, chosen by file extension.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cvxgauss::surface::Budget;
use cvxgauss::{BodySpec, ConvexBody, Direction, GaussianModel, IbpConfig, TestFunction};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Required; there is no wall-clock seeding.
    pub seed: u64,
    pub model: ModelSpec,
    pub body: BodySpec,
    #[serde(default)]
    pub psi: PsiSpec,
    #[serde(default)]
    pub directions: Directions,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub study: Study,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_profile: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpec {
    Constant { value: f64 },
    Coordinate { index: usize },
    Linear { weights: Vec<f64>, bias: f64 },
    Tanh { weights: Vec<f64>, bias: f64 },
    DistanceClamp { center: Vec<f64>, cap: f64 },
}

impl Default for PsiSpec {
    fn default() -> Self {
        PsiSpec::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Directions {
    /// Directions `k` of the identity; all coordinate axes when empty.
    #[serde(default)]
    pub k: Vec<Vec<f64>>,
    /// Pinned decomposition direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    /// Candidates for the decomposition direction when `h` is not pinned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Monte Carlo samples for volume integrals.
    pub samples: usize,
    pub order: usize,
    pub order_3d: usize,
    /// Monte Carlo samples for graph integrals over domains of dimension above 3.
    pub surface_samples: usize,
    pub vertical_samples: usize,
    pub fd_step: f64,
    pub epsilons: Vec<f64>,
    pub content_samples: usize,
    pub subspace_samples: usize,
    /// Ray-cast boundary points for `gradcheck` and `density`.
    pub boundary_points: usize,
    pub density_radius: f64,
    pub density_samples: usize,
    /// Also run the signed vector-measure assembly in `ibp`.
    pub vector_measure: bool,
    /// Overrides the default comparison tolerance of every check.
    pub tolerance: Option<f64>,
}

impl Default for Budgets {
    fn default() -> Self {
        let b = Budget::default();
        Self {
            samples: 1_000_000,
            order: b.order,
            order_3d: b.order_3d,
            surface_samples: b.samples,
            vertical_samples: b.vertical_samples,
            fd_step: b.fd_step,
            epsilons: vec![0.04, 0.02, 0.01],
            content_samples: 8_000_000,
            subspace_samples: 2000,
            boundary_points: 100,
            density_radius: 0.05,
            density_samples: 20_000,
            vector_measure: false,
            tolerance: None,
        }
    }
}

impl Budgets {
    pub fn surface(&self) -> Budget {
        Budget {
            order: self.order,
            order_3d: self.order_3d,
            samples: self.surface_samples,
            vertical_samples: self.vertical_samples,
            fd_step: self.fd_step,
        }
    }
}

/// Grids for the convergence studies.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Study {
    pub dims: Vec<usize>,
    /// Coordinate axes of nested frames; defaults to frames through `h`.
    pub frames: Vec<Vec<usize>>,
    pub sample_grid: Vec<usize>,
    pub epsilon_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub dir: String,
    pub csv: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { dir: "out".into(), csv: true }
    }
}

fn err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config { path: path.into(), message: message.into() }
}

fn check_vec(path: &str, v: &[f64], dim: usize) -> Result<(), CliError> {
    if v.len() != dim {
        return Err(err(path, format!("expected {dim} components, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(err(path, "components must be finite"));
    }
    Ok(())
}

fn check_direction(path: &str, v: &[f64], dim: usize) -> Result<(), CliError> {
    check_vec(path, v, dim)?;
    if v.iter().all(|x| *x == 0.0) {
        return Err(err(path, "direction must be non-zero"));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        Self::parse(&text, toml)
    }

    /// Parses and validates; errors name the offending field.
    pub fn parse(text: &str, toml: bool) -> Result<Self, CliError> {
        let value: serde_json::Value = if toml {
            toml::from_str(text).map_err(|e| err("", e.to_string()))?
        } else {
            serde_json::from_str(text).map_err(|e| err("", e.to_string()))?
        };
        let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            err(if path == "." { "" } else { &path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.model.dim;
        if n == 0 {
            return Err(err("model.dim", "dimension must be at least 1"));
        }
        if let Some(p) = &self.model.spectral_profile {
            check_vec("model.spectral_profile", p, n)?;
        }
        match &self.psi {
            PsiSpec::Coordinate { index } if *index >= n => {
                return Err(err("psi.index", format!("index {index} out of range for dimension {n}")));
            }
            PsiSpec::Linear { weights, .. } | PsiSpec::Tanh { weights, .. } => check_vec("psi.weights", weights, n)?,
            PsiSpec::DistanceClamp { center, cap } => {
                check_vec("psi.center", center, n)?;
                if !(*cap > 0.0) {
                    return Err(err("psi.cap", "cap must be positive"));
                }
            }
            _ => {}
        }
        for (i, k) in self.directions.k.iter().enumerate() {
            check_direction(&format!("directions.k[{i}]"), k, n)?;
        }
        if let Some(h) = &self.directions.h {
            check_direction("directions.h", h, n)?;
        }
        if let Some(c) = &self.directions.candidates {
            if c.is_empty() {
                return Err(err("directions.candidates", "candidate list is empty"));
            }
            for (i, v) in c.iter().enumerate() {
                check_direction(&format!("directions.candidates[{i}]"), v, n)?;
            }
        }
        let b = &self.budgets;
        if b.samples < 2 {
            return Err(err("budgets.samples", "at least two samples are required"));
        }
        if b.order < 2 || b.order_3d < 2 {
            return Err(err("budgets.order", "quadrature order must be at least 2"));
        }
        if !(b.fd_step > 0.0) {
            return Err(err("budgets.fd_step", "step must be positive"));
        }
        check_epsilons("budgets.epsilons", &b.epsilons)?;
        if !self.study.epsilon_grid.is_empty() {
            check_epsilons("study.epsilon_grid", &self.study.epsilon_grid)?;
        }
        if self.study.dims.windows(2).any(|w| w[1] <= w[0]) || self.study.dims.contains(&0) {
            return Err(err("study.dims", "dimensions must be positive and increasing"));
        }
        if self.study.sample_grid.windows(2).any(|w| w[1] <= w[0]) || self.study.sample_grid.iter().any(|s| *s < 2) {
            return Err(err("study.sample_grid", "sample counts must be at least 2 and increasing"));
        }
        for (i, f) in self.study.frames.iter().enumerate() {
            let path = format!("study.frames[{i}]");
            if f.is_empty() || f.len() > 3 || f.iter().any(|a| *a >= n) {
                return Err(err(&path, format!("frames need 1 to 3 axes below {n}")));
            }
            if i > 0 && !self.study.frames[i - 1].iter().all(|a| f.contains(a)) {
                return Err(err(&path, "frames must be nested"));
            }
        }
        if let Some(t) = b.tolerance {
            if !(t > 0.0) {
                return Err(err("budgets.tolerance", "tolerance must be positive"));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<GaussianModel, CliError> {
        let m = match &self.model.spectral_profile {
            Some(p) => GaussianModel::with_spectral_profile(self.model.dim, p.clone()),
            None => GaussianModel::new(self.model.dim),
        };
        m.map_err(|e| err("model", e.to_string()))
    }

    pub fn body(&self) -> Result<ConvexBody, CliError> {
        Ok(self.body.build(&self.model()?, "body")?)
    }

    pub fn psi(&self) -> TestFunction {
        match self.psi.clone() {
            PsiSpec::Constant { value } => TestFunction::Constant(value),
            PsiSpec::Coordinate { index } => TestFunction::Coordinate(index),
            PsiSpec::Linear { weights, bias } => TestFunction::Linear { weights, bias },
            PsiSpec::Tanh { weights, bias } => TestFunction::Tanh { weights, bias },
            PsiSpec::DistanceClamp { center, cap } => TestFunction::DistanceClamp { center, cap },
        }
    }

    pub fn ks(&self) -> Result<Vec<Direction>, CliError> {
        if self.directions.k.is_empty() {
            return Ok((0..self.model.dim).map(|i| Direction::axis(self.model.dim, i)).collect());
        }
        self.directions.k.iter().map(|k| Ok(Direction::new(k.clone())?)).collect()
    }

    pub fn ibp(&self) -> IbpConfig {
        IbpConfig {
            samples: self.budgets.samples,
            budget: self.budgets.surface(),
            h: self.directions.h.clone(),
            candidates: self.directions.candidates.clone(),
            boundary_samples: self.budgets.vertical_samples,
            seed: self.seed,
            tolerance: self.budgets.tolerance,
        }
    }

    /// SHA-256 of the canonical JSON of everything that affects results (the output
    /// location is excluded).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.outputs = Outputs::default();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn check_epsilons(path: &str, e: &[f64]) -> Result<(), CliError> {
    if e.len() < 3 {
        return Err(err(path, "at least three epsilons are required"));
    }
    if e.iter().any(|x| !(*x > 0.0 && *x <= 0.1)) {
        return Err(err(path, "epsilons must lie in (0, 0.1]"));
    }
    if e.windows(2).any(|w| w[1] >= w[0]) {
        return Err(err(path, "epsilons must be strictly decreasing"));
    }
    Ok(())
}
