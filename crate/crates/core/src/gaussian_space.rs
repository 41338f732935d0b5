//! The ambient Gaussian space in whitened coordinates.
//!
//! Everything lives on `R^n` with the standard Gaussian measure, so the Cameron-Martin
//! norm is the Euclidean norm and `h^(x) = <h, x>`. A model may carry a spectral
//! (Karhunen-Loeve) profile; it only labels and scales demo bodies.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, norm_sq, project_out, scale};
use crate::par;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    dim: usize,
    spectral_profile: Option<Vec<f64>>,
}

impl GaussianModel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        Ok(Self { dim, spectral_profile: None })
    }

    pub fn with_spectral_profile(dim: usize, profile: Vec<f64>) -> Result<Self> {
        let mut m = Self::new(dim)?;
        check_dim(dim, profile.len())?;
        if profile.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Parameter("spectral profile must be strictly positive".into()));
        }
        if profile.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Parameter("spectral profile must be non-increasing".into()));
        }
        m.spectral_profile = Some(profile);
        Ok(m)
    }

    /// Model labelled with the first `dim` Karhunen-Loeve eigenvalues of Brownian
    /// motion on [0, 1].
    pub fn brownian(dim: usize) -> Result<Self> {
        Self::with_spectral_profile(dim, brownian_kl_eigenvalues(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spectral_profile(&self) -> Option<&[f64]> {
        self.spectral_profile.as_deref()
    }
}

/// `lambda_k = ((k - 1/2) pi)^-2`, k = 1..=n.
pub fn brownian_kl_eigenvalues(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let w = (k as f64 - 0.5) * PI;
            1.0 / (w * w)
        })
        .collect()
}

/// A unit vector of the Cameron-Martin space.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `v`; fails on zero or non-finite input.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let len = norm(&v);
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::Domain("direction must be a finite non-zero vector".into()));
        }
        Ok(Self(scale(&v, 1.0 / len)))
    }

    pub fn axis(dim: usize, i: usize) -> Self {
        Self(crate::linalg::unit(dim, i))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.clone()
    }
}

impl AsRef<[f64]> for Direction {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// `G_m(z) = (2 pi)^{-m/2} exp(-|z|^2 / 2)`.
pub fn gaussian_density(m: usize, z: &[f64]) -> Result<f64> {
    if m == 0 {
        return Err(Error::Parameter("m must be at least 1".into()));
    }
    check_dim(m, z.len())?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite argument to the Gaussian density".into()));
    }
    Ok(density_unchecked(m, norm_sq(z)))
}

/// Density from the squared norm, without validation.
#[inline]
pub(crate) fn density_unchecked(m: usize, r2: f64) -> f64 {
    (2.0 * PI).powf(-(m as f64) / 2.0) * (-0.5 * r2).exp()
}

/// One-dimensional standard normal density.
#[inline]
pub fn g1(t: f64) -> f64 {
    if t.is_infinite() {
        0.0
    } else {
        (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
    }
}

/// Splits `x = y + t h` with `y` orthogonal to `h` and `t = <h, x>`.
pub fn split_along(x: &[f64], h: &Direction) -> Result<(Vec<f64>, f64)> {
    check_dim(h.dim(), x.len())?;
    let t = dot(h.as_slice(), x);
    let y = x.iter().zip(h.as_slice()).map(|(xi, hi)| xi - t * hi).collect();
    Ok((y, t))
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Bounded (or Gaussian-integrable) Lipschitz test functions.
#[derive(Clone)]
pub enum TestFunction {
    Constant(f64),
    /// `x_i`
    Coordinate(usize),
    /// `<w, x> + b`
    Linear { weights: Vec<f64>, bias: f64 },
    /// `tanh(<w, x> + b)`
    Tanh { weights: Vec<f64>, bias: f64 },
    /// `min(|x - c|, cap)`
    DistanceClamp { center: Vec<f64>, cap: f64 },
    Custom {
        id: String,
        value: ScalarFn,
        gradient: Option<VectorFn>,
        lipschitz: f64,
    },
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl TestFunction {
    pub fn custom(
        id: impl Into<String>,
        lipschitz: f64,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Custom { id: id.into(), value: Arc::new(value), gradient: None, lipschitz }
    }

    pub fn with_gradient(self, gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        match self {
            Self::Custom { id, value, lipschitz, .. } => {
                Self::Custom { id, value, gradient: Some(Arc::new(gradient)), lipschitz }
            }
            other => other,
        }
    }

    pub fn id(&self) -> String {
        match self {
            Self::Constant(c) => format!("constant({c})"),
            Self::Coordinate(i) => format!("coordinate({i})"),
            Self::Linear { weights, bias } => format!("linear({weights:?},{bias})"),
            Self::Tanh { weights, bias } => format!("tanh({weights:?},{bias})"),
            Self::DistanceClamp { center, cap } => format!("distance_clamp({center:?},{cap})"),
            Self::Custom { id, .. } => id.clone(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Coordinate(i) => x[*i],
            Self::Linear { weights, bias } => dot(weights, x) + bias,
            Self::Tanh { weights, bias } => (dot(weights, x) + bias).tanh(),
            Self::DistanceClamp { center, cap } => crate::linalg::dist(x, center).min(*cap),
            Self::Custom { value, .. } => value(x),
        }
    }

    /// Analytic gradient, when the function provides one.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(match self {
            Self::Constant(_) => vec![0.0; x.len()],
            Self::Coordinate(i) => crate::linalg::unit(x.len(), *i),
            Self::Linear { weights, .. } => weights.clone(),
            Self::Tanh { weights, bias } => {
                let s = 1.0 / (dot(weights, x) + bias).cosh();
                scale(weights, s * s)
            }
            Self::DistanceClamp { center, cap } => {
                let d = crate::linalg::dist(x, center);
                if d >= *cap || d == 0.0 {
                    vec![0.0; x.len()]
                } else {
                    scale(&crate::linalg::sub(x, center), 1.0 / d)
                }
            }
            Self::Custom { gradient, .. } => return gradient.as_ref().map(|g| g(x)),
        })
    }

    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Coordinate(_) | Self::DistanceClamp { .. } => 1.0,
            Self::Linear { weights, .. } | Self::Tanh { weights, .. } => norm(weights),
            Self::Custom { lipschitz, .. } => *lipschitz,
        }
    }

    /// Directional derivative along `h`: analytic when available, otherwise a central
    /// difference with step `fd_step`.
    pub fn directional_derivative(&self, x: &[f64], h: &[f64], fd_step: f64) -> f64 {
        match self.gradient(x) {
            Some(g) => dot(&g, h),
            None => {
                let xp: Vec<f64> = x.iter().zip(h).map(|(a, b)| a + fd_step * b).collect();
                let xm: Vec<f64> = x.iter().zip(h).map(|(a, b)| a - fd_step * b).collect();
                (self.value(&xp) - self.value(&xm)) / (2.0 * fd_step)
            }
        }
    }

    /// Samples `pairs` random pairs in `dim` dimensions and checks the declared
    /// Lipschitz bound (with a relative slack of 1e-9).
    pub fn check_lipschitz(&self, dim: usize, pairs: usize, seed: u64) -> bool {
        let l = self.lipschitz_bound();
        let mut rng = par::chunk_rng(seed, 0);
        (0..pairs).all(|_| {
            let x: Vec<f64> = (0..dim).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            let y: Vec<f64> = (0..dim).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            let lhs = (self.value(&x) - self.value(&y)).abs();
            lhs <= l * crate::linalg::dist(&x, &y) * (1.0 + 1e-9) + 1e-12
        })
    }
}

/// `d*_h psi(x) = d_h psi(x) - psi(x) <h, x>`.
pub fn adjoint_derivative(psi: &TestFunction, h: &Direction, x: &[f64], fd_step: f64) -> Result<f64> {
    if !(fd_step > 0.0) {
        return Err(Error::Parameter(format!("finite-difference step must be positive, got {fd_step}")));
    }
    check_dim(h.dim(), x.len())?;
    let d = psi.directional_derivative(x, h.as_slice(), fd_step);
    Ok(d - psi.value(x) * dot(h.as_slice(), x))
}

/// Standard Gaussian vector of length `n`.
pub(crate) fn normal_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `count` i.i.d. standard Gaussian draws, projected onto the orthogonal complement of
/// the orthonormal set `subspace` when given. Chunk-seeded, so identical for any worker
/// count.
pub fn sample_gaussian(
    model: &GaussianModel,
    subspace: Option<&[Vec<f64>]>,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::Parameter("count must be at least 1".into()));
    }
    let n = model.dim();
    if let Some(s) = subspace {
        for v in s {
            check_dim(n, v.len())?;
        }
        if !crate::linalg::is_orthonormal(s, 1e-10) {
            return Err(Error::Parameter("subspace vectors must be orthonormal".into()));
        }
    }
    let chunks = par::map_chunks(count, seed, |rng, len| {
        (0..len)
            .map(|_| {
                let x = normal_vec(rng, n);
                match subspace {
                    Some(s) => project_out(&x, s),
                    None => x,
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_values() {
        assert!((gaussian_density(1, &[0.0]).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((gaussian_density(1, &[1.0]).unwrap() - 0.241_970_724_519_143_37).abs() < 1e-15);
        assert!((gaussian_density(2, &[0.0, 0.0]).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(matches!(gaussian_density(1, &[f64::NAN]), Err(Error::Domain(_))));
        assert!(gaussian_density(2, &[1.0]).is_err());
    }

    #[test]
    fn split_examples() {
        let (y, t) = split_along(&[3.0, 4.0], &Direction::axis(2, 0)).unwrap();
        assert_eq!((y, t), (vec![0.0, 4.0], 3.0));
        let h = Direction::new(vec![1.0, 1.0]).unwrap();
        let (y, t) = split_along(&[1.0, 1.0], &h).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        assert!((t - 2f64.sqrt()).abs() < 1e-12);
        let (y, t) = split_along(&h.to_vec(), &h).unwrap();
        assert!(norm(&y) < 1e-12 && (t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_examples() {
        let e1 = Direction::axis(3, 0);
        let one = TestFunction::Constant(1.0);
        let v = adjoint_derivative(&one, &e1, &[0.7, 2.0, -1.0], DEFAULT_FD_STEP).unwrap();
        assert!((v + 0.7).abs() < 1e-15);

        let h = Direction::new(vec![0.6, 0.8, 0.0]).unwrap();
        let lin = TestFunction::Linear { weights: h.to_vec(), bias: 0.0 };
        let x = [1.0, 2.0, 5.0];
        let t = dot(h.as_slice(), &x);
        let v = adjoint_derivative(&lin, &h, &x, DEFAULT_FD_STEP).unwrap();
        assert!((v - (1.0 - t * t)).abs() < 1e-12);

        assert!(adjoint_derivative(&one, &e1, &x, 0.0).is_err());
    }

    #[test]
    fn tanh_adjoint_matches_finite_difference() {
        let e1 = Direction::axis(2, 0);
        let psi = TestFunction::Tanh { weights: vec![1.0, 0.0], bias: 0.0 };
        let analytic = adjoint_derivative(&psi, &e1, &[0.0, 0.3], 1e-5).unwrap();
        assert!((analytic - 1.0).abs() < 1e-15);
        let fd = TestFunction::custom("tanh-x1", 1.0, |x| x[0].tanh());
        let numeric = adjoint_derivative(&fd, &e1, &[0.0, 0.3], 1e-5).unwrap();
        assert!((numeric - 1.0).abs() < 1e-9);
    }

    #[test]
    fn library_functions_respect_lipschitz_bounds() {
        let fns = [
            TestFunction::Constant(2.0),
            TestFunction::Coordinate(1),
            TestFunction::Tanh { weights: vec![1.0, 1.0, 0.0], bias: 0.2 },
            TestFunction::DistanceClamp { center: vec![0.5, 0.0, 0.0], cap: 1.0 },
        ];
        for f in &fns {
            assert!(f.check_lipschitz(3, 500, 3), "{f:?}");
        }
        let liar = TestFunction::custom("liar", 0.1, |x| 10.0 * x[0]);
        assert!(!liar.check_lipschitz(3, 100, 3));
    }

    #[test]
    fn sampler_projection_and_determinism() {
        let m = GaussianModel::new(3).unwrap();
        let e1 = vec![crate::linalg::unit(3, 0)];
        let pts = sample_gaussian(&m, Some(&e1), 5000, 9).unwrap();
        assert!(pts.iter().all(|p| p[0].abs() < 1e-12));
        let a = sample_gaussian(&m, None, 9000, 1).unwrap();
        let b = par::sequential(|| sample_gaussian(&m, None, 9000, 1).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn spectral_profile_validation() {
        assert!(GaussianModel::with_spectral_profile(2, vec![1.0, 2.0]).is_err());
        assert!(GaussianModel::with_spectral_profile(2, vec![1.0, -1.0]).is_err());
        let b = GaussianModel::brownian(3).unwrap();
        let p = b.spectral_profile().unwrap();
        assert!((p[0] - 4.0 / (PI * PI)).abs() < 1e-15);
        assert!(GaussianModel::new(0).is_err());
    }
}
