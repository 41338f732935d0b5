//! Worked examples for each module, checked against closed forms or against 1-D
//! quadratures computed here independently of the library.

use std::f64::consts::PI;

use cvxgauss::convex_body::{minkowski_functional, minkowski_gradient_fd, DEFAULT_TOL};
use cvxgauss::gaussian_space::{adjoint_derivative, gaussian_density, sample_gaussian, split_along};
use cvxgauss::graph::{
    boundary_classify, classify_case, graph_value_and_gradient, section_interval, BoundaryClass, CaseTag,
    ExplicitGraph, GraphPair, Which,
};
use cvxgauss::ibp::{
    lhs_volume_integral, rhs_surface_integral, vector_measure_check, verify_ibp, IbpConfig, Verdict,
};
use cvxgauss::surface::{
    area_formula_integral, coordinate_frame, epigraph_perimeter, minkowski_content_perimeter, subspace_hausdorff,
    total_boundary_measure, Budget, SubspaceBudget,
};
use cvxgauss::{ConvexBody, Direction, GaussianModel, TestFunction};

const G1_1: f64 = 0.241_970_724_519_143_37;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn phi(t: f64) -> f64 {
    (-0.5 * t * t).exp() * INV_SQRT_2PI
}

/// Adaptive Simpson on `[a, b]`.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), eps, 40)
}

fn e1(n: usize) -> Direction {
    Direction::axis(n, 0)
}

#[test]
fn gaussian_space_examples() {
    assert!((gaussian_density(1, &[0.0]).unwrap() - INV_SQRT_2PI).abs() < 1e-15);
    assert!((gaussian_density(1, &[1.0]).unwrap() - G1_1).abs() < 1e-15);
    assert!((gaussian_density(2, &[0.0, 0.0]).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);

    let (y, t) = split_along(&[3.0, 4.0], &e1(2)).unwrap();
    assert_eq!((y, t), (vec![0.0, 4.0], 3.0));
    let d = Direction::new(vec![1.0, 1.0]).unwrap();
    let (y, t) = split_along(&[1.0, 1.0], &d).unwrap();
    assert!(y.iter().all(|v| v.abs() < 1e-15) && (t - 2f64.sqrt()).abs() < 1e-15);

    let x = [0.7, -0.2, 1.1];
    assert!((adjoint_derivative(&TestFunction::Constant(1.0), &e1(3), &x, 1e-5).unwrap() + 0.7).abs() < 1e-12);
    let lin = TestFunction::Linear { weights: vec![1.0, 0.0, 0.0], bias: 0.0 };
    assert!((adjoint_derivative(&lin, &e1(3), &x, 1e-5).unwrap() - (1.0 - 0.49)).abs() < 1e-9);
    let th = TestFunction::Tanh { weights: vec![1.0, 0.0, 0.0], bias: 0.0 };
    assert!((adjoint_derivative(&th, &e1(3), &[0.0; 3], 1e-5).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn sample_mean_and_determinism() {
    let m = GaussianModel::new(3).unwrap();
    let xs = sample_gaussian(&m, None, 1_000_000, 11).unwrap();
    for i in 0..3 {
        let mean = xs.iter().map(|x| x[i]).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 4e-3, "coordinate {i}: {mean}");
    }
    assert_eq!(sample_gaussian(&m, None, 5000, 3).unwrap(), sample_gaussian(&m, None, 5000, 3).unwrap());
}

#[test]
fn gauge_examples() {
    let r = 2.5;
    let ball = ConvexBody::ball(3, r).unwrap();
    let x = [0.3, -1.2, 0.4];
    let exact = (0.09f64 + 1.44 + 0.16).sqrt() / r;
    assert!((minkowski_functional(&ball, &x, DEFAULT_TOL).unwrap() - exact).abs() <= 1e-9);
    assert_eq!(minkowski_functional(&ball, &[0.0; 3], DEFAULT_TOL).unwrap(), 0.0);

    let half = ConvexBody::halfspace(vec![1.0, 0.0, 0.0], 2.0).unwrap();
    assert!((minkowski_functional(&half, &[2.0, 0.0, 0.0], DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-9);

    let b = ball.boundary_point(&[0.0, 0.6, 0.8]).unwrap().unwrap();
    let g = minkowski_gradient_fd(&ball, &b, 1e-4, 1e-12).unwrap();
    for i in 0..3 {
        assert!((g[i] - b[i] / (r * r)).abs() < 1e-6);
    }
    let a = [0.6, 0.0, 0.8];
    let tilted = ConvexBody::halfspace(a.to_vec(), 1.5).unwrap();
    let g = minkowski_gradient_fd(&tilted, &[1.5 * 0.6, 0.3, 1.5 * 0.8], 1e-4, 1e-12).unwrap();
    for i in 0..3 {
        assert!((g[i] - a[i] / 1.5).abs() < 1e-6);
    }
}

#[test]
fn density_examples() {
    let square = ConvexBody::polytope(vec![
        (vec![1.0, 0.0], 1.0),
        (vec![-1.0, 0.0], 1.0),
        (vec![0.0, 1.0], 1.0),
        (vec![0.0, -1.0], 1.0),
    ])
    .unwrap();
    let d = square.lebesgue_density(&[0.0, 0.0], 0.1, 20_000, 1).unwrap();
    assert!((d.value - 1.0).abs() < 1e-12);
    let d = square.lebesgue_density(&[1.0, 1.0], 0.1, 20_000, 2).unwrap();
    assert!(d.within_se(0.25, 3.0), "{d:?}");
    let half = ConvexBody::halfspace(vec![0.0, 1.0], 0.5).unwrap();
    let d = half.lebesgue_density(&[3.0, 0.5], 0.1, 20_000, 3).unwrap();
    assert!(d.within_se(0.5, 3.0), "{d:?}");
}

#[test]
fn decomposition_examples() {
    let ball = ConvexBody::ball(2, 1.0).unwrap();
    let e2 = Direction::axis(2, 1);
    let (g, f) = section_interval(&ball, &e2, &[0.6, 0.0], DEFAULT_TOL).unwrap().unwrap();
    assert!((g + 0.8).abs() < 1e-9 && (f - 0.8).abs() < 1e-9);
    assert_eq!(classify_case(&ball, &e2, 16, 0).unwrap(), CaseTag::BothFinite);

    let half = ConvexBody::halfspace(vec![1.0, 0.0, 0.0], 1.0).unwrap();
    let (g, f) = section_interval(&half, &e1(3), &[0.0; 3], DEFAULT_TOL).unwrap().unwrap();
    assert!(g == f64::NEG_INFINITY && (f - 1.0).abs() < 1e-9);
    assert_eq!(classify_case(&half, &e1(3), 16, 0).unwrap(), CaseTag::FFiniteOnly);

    let cyl = ConvexBody::cylinder(&ConvexBody::ball(2, 1.0).unwrap(), 2).unwrap();
    let e3 = Direction::axis(3, 2);
    let (g, f) = section_interval(&cyl, &e3, &[0.5, 0.0, 0.0], DEFAULT_TOL).unwrap().unwrap();
    assert!(g.is_infinite() && f.is_infinite());
    assert_eq!(classify_case(&cyl, &e3, 16, 0).unwrap(), CaseTag::BothInfinite);

    let pair = GraphPair::new(&ball, e2.clone()).unwrap();
    let (v, grad) = graph_value_and_gradient(&pair, Which::Upper, &[0.0, 0.0], 1e-5).unwrap();
    assert!((v - 1.0).abs() < 1e-9 && grad.iter().all(|c| c.abs() < 1e-6));
    let (v, grad) = graph_value_and_gradient(&pair, Which::Upper, &[0.6, 0.0], 1e-5).unwrap();
    assert!((v - 0.8).abs() < 1e-9 && (grad[0] + 0.75).abs() < 1e-6);

    assert_eq!(boundary_classify(&ball, &pair, &[0.6, 0.8], DEFAULT_TOL).unwrap(), BoundaryClass::UpperGraph);
    assert_eq!(boundary_classify(&ball, &pair, &[0.6, -0.8], DEFAULT_TOL).unwrap(), BoundaryClass::LowerGraph);
    let cpair = GraphPair::new(&cyl, e3).unwrap();
    assert_eq!(boundary_classify(&cyl, &cpair, &[1.0, 0.0, 5.0], DEFAULT_TOL).unwrap(), BoundaryClass::Vertical);
}

#[test]
fn flat_and_tilted_graph_perimeters() {
    let m = GaussianModel::new(3).unwrap();
    let h = Direction::axis(3, 2);
    for a in [0.0, 1.0, 3.0] {
        let dir = [a * 0.6, a * 0.8, 0.0];
        let f = ExplicitGraph::affine(h.clone(), &dir, 0.0).unwrap();
        let e = epigraph_perimeter(&f, &m, &Budget::default(), 0).unwrap();
        assert!((e.value - INV_SQRT_2PI).abs() < 1e-9, "|a| = {a}: {e:?}");
    }
    let c = 0.7;
    let f = ExplicitGraph::affine(h, &[0.0; 3], c).unwrap();
    let e = epigraph_perimeter(&f, &m, &Budget::default(), 0).unwrap();
    assert!((e.value - phi(c)).abs() < 1e-12);
}

#[test]
fn abs_epigraph_matches_quadrature() {
    // f(y) = |y| on R: 2 * int_0^inf G1(y) sqrt(2) G1(y) dy.
    let oracle = 2.0 * simpson(&|y: f64| phi(y) * 2f64.sqrt() * phi(y), 0.0, 12.0, 1e-14);
    assert!((oracle - INV_SQRT_2PI).abs() < 1e-12);
    let m = GaussianModel::new(2).unwrap();
    let f = ExplicitGraph::new(Direction::axis(2, 1), |y: &[f64]| y[0].abs());
    let e = epigraph_perimeter(&f, &m, &Budget::default(), 0).unwrap();
    assert!((e.value - oracle).abs() < 1e-8, "{e:?} vs {oracle}");
}

#[test]
fn ball_upper_graph_matches_quadrature() {
    // y = sin(theta) removes the endpoint singularity of 1/sqrt(1 - y^2).
    let oracle = simpson(&|th: f64| phi(th.cos()) * phi(th.sin()), -PI / 2.0, PI / 2.0, 1e-14);
    let m = GaussianModel::new(2).unwrap();
    let ball = ConvexBody::ball(2, 1.0).unwrap();
    let pair = GraphPair::new(&ball, Direction::axis(2, 1)).unwrap();
    let e = area_formula_integral(&pair, Which::Upper, &|_: &[f64]| 1.0, &m, &Budget::default(), 0).unwrap();
    assert!((e.value - oracle).abs() < 1e-4 * oracle, "{e:?} vs {oracle}");
}

#[test]
fn total_boundary_examples() {
    let b = Budget::default();
    let ball = ConvexBody::ball(2, 1.0).unwrap();
    let pair = GraphPair::new(&ball, Direction::axis(2, 1)).unwrap();
    let e = total_boundary_measure(&ball, &pair, &b, 0).unwrap();
    assert!((e.value - (-0.5f64).exp()).abs() < 1e-4);

    let half = ConvexBody::halfspace(vec![1.0, 0.0, 0.0], 1.0).unwrap();
    let pair = GraphPair::new(&half, e1(3)).unwrap();
    assert!((total_boundary_measure(&half, &pair, &b, 0).unwrap().value - G1_1).abs() < 1e-10);

    let slab = ConvexBody::polytope(vec![(vec![1.0, 0.0, 0.0], 1.0), (vec![-1.0, 0.0, 0.0], 1.0)]).unwrap();
    let pair = GraphPair::new(&slab, e1(3)).unwrap();
    assert!((total_boundary_measure(&slab, &pair, &b, 0).unwrap().value - 2.0 * G1_1).abs() < 1e-10);
}

#[test]
fn subspace_examples() {
    let sb = SubspaceBudget { samples: 200, ..SubspaceBudget::default() };
    let half = ConvexBody::halfspace(vec![1.0, 0.0, 0.0], 1.0).unwrap();
    let e = subspace_hausdorff(&half, &coordinate_frame(3, &[0]), None, &sb, 1).unwrap();
    assert!((e.value - G1_1).abs() < 1e-9, "{e:?}");
    let ball = ConvexBody::ball(2, 1.0).unwrap();
    let e = subspace_hausdorff(&ball, &coordinate_frame(2, &[0, 1]), None, &sb, 1).unwrap();
    assert!((e.value - (-0.5f64).exp()).abs() < 1e-5, "{e:?}");
}

#[test]
fn minkowski_content_examples() {
    let eps = [0.04, 0.02, 0.01];
    let half = ConvexBody::halfspace(vec![1.0, 0.0], 1.0).unwrap();
    let c = minkowski_content_perimeter(&half, &eps, 2_000_000, 5).unwrap();
    let tol = (3.0 * c.estimate.std_error).max(0.02 * G1_1);
    assert!((c.estimate.value - G1_1).abs() <= tol, "{c:?}");

    let slab = ConvexBody::polytope(vec![(vec![1.0, 0.0], 1.0), (vec![-1.0, 0.0], 1.0)]).unwrap();
    let c = minkowski_content_perimeter(&slab, &eps, 2_000_000, 6).unwrap();
    let tol = (3.0 * c.estimate.std_error).max(0.04 * G1_1);
    assert!((c.estimate.value - 2.0 * G1_1).abs() <= tol, "{c:?}");
}

#[test]
fn volume_side_examples() {
    let m = GaussianModel::new(3).unwrap();
    let half = ConvexBody::halfspace(vec![1.0, 0.0, 0.0], 1.0).unwrap();
    let e = lhs_volume_integral(&half, &TestFunction::Constant(1.0), &e1(3), &m, 500_000, 1).unwrap();
    assert!(e.within_se(G1_1, 3.5), "{e:?}");
    let e = lhs_volume_integral(&half, &TestFunction::Coordinate(0), &e1(3), &m, 500_000, 2).unwrap();
    assert!(e.within_se(G1_1, 3.5), "{e:?}");
    let ball = ConvexBody::ball(3, 1.0).unwrap();
    let e = lhs_volume_integral(&ball, &TestFunction::Constant(1.0), &e1(3), &m, 500_000, 3).unwrap();
    assert!(e.within_se(0.0, 3.5), "{e:?}");
}

#[test]
fn surface_side_examples() {
    let b = Budget::default();
    let ball = ConvexBody::ball(2, 1.0).unwrap();
    let pair = GraphPair::new(&ball, Direction::new(vec![0.3, 1.0]).unwrap()).unwrap();
    let zero = rhs_surface_integral(&ball, &pair, &TestFunction::Constant(1.0), &e1(2), &b, 0).unwrap();
    assert!(zero.value.abs() < 1e-6, "{zero:?}");
    let e = rhs_surface_integral(&ball, &pair, &TestFunction::Coordinate(0), &e1(2), &b, 0).unwrap();
    assert!((e.value - (-0.5f64).exp() / 2.0).abs() < 1e-4, "{e:?}");
}

#[test]
fn verify_examples() {
    let cfg = IbpConfig { samples: 1_000_000, seed: 7, ..IbpConfig::default() };
    let half = ConvexBody::halfspace(vec![1.0, 0.0, 0.0], 1.0).unwrap();
    let r = verify_ibp(&half, &TestFunction::Constant(1.0), &e1(3), &IbpConfig { h: Some(vec![1.0, 0.0, 0.0]), ..cfg.clone() }).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");

    let ball = ConvexBody::ball(3, 1.5).unwrap();
    let psi = TestFunction::Tanh { weights: vec![1.0, 1.0, 0.0], bias: 0.0 };
    let r = verify_ibp(&ball, &psi, &Direction::axis(3, 1), &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");

    let e2 = Direction::axis(2, 1);
    let ell = ConvexBody::ellipsoid(vec![1.0, 2.0]).unwrap();
    let lvl = ConvexBody::level_set(vec![vec![1.0, 0.0], vec![0.0, 0.25]], vec![0.0, 0.0], -1.0).unwrap();
    let a = verify_ibp(&ell, &TestFunction::Constant(1.0), &e2, &cfg).unwrap();
    let b = verify_ibp(&lvl, &TestFunction::Constant(1.0), &e2, &cfg).unwrap();
    assert_eq!(a.verdict, Verdict::Pass, "{a:?}");
    assert_eq!(a.lhs, b.lhs);
    assert!((a.rhs.value - b.rhs.value).abs() <= 1e-6 * a.rhs.value.abs().max(1e-3), "{a:?} {b:?}");
}

#[test]
fn vector_measure_examples() {
    let cfg = IbpConfig { samples: 1_000_000, seed: 3, ..IbpConfig::default() };
    let slab = ConvexBody::polytope(vec![(vec![1.0, 0.0], 1.0), (vec![-1.0, 0.0], 1.0)]).unwrap();
    let pair = GraphPair::new(&slab, e1(2)).unwrap();
    let r = vector_measure_check(&slab, &pair, &TestFunction::Constant(1.0), &e1(2), &cfg).unwrap();
    assert!(r.rhs.value.abs() < 1e-12, "{r:?}");
    assert!(r.lhs.within_se(0.0, 3.0), "{r:?}");
    assert!((r.metadata.terms["upper_nu_k"] - G1_1).abs() < 1e-10);
    assert!((r.metadata.terms["lower_nu_k"] - G1_1).abs() < 1e-10);

    let half = ConvexBody::halfspace(vec![1.0, 0.0, 0.0], 1.0).unwrap();
    let pair = GraphPair::new(&half, e1(3)).unwrap();
    let r = vector_measure_check(&half, &pair, &TestFunction::Constant(1.0), &Direction::axis(3, 1), &cfg).unwrap();
    assert!(r.rhs.value.abs() < 1e-12 && r.lhs.within_se(0.0, 3.0), "{r:?}");

    let ball = ConvexBody::ball(2, 1.0).unwrap();
    let pair = GraphPair::new(&ball, Direction::new(vec![1.0, 0.4]).unwrap()).unwrap();
    let r = vector_measure_check(&ball, &pair, &TestFunction::Coordinate(1), &Direction::axis(2, 1), &cfg).unwrap();
    let target = (-0.5f64).exp() / 2.0;
    assert!((r.rhs.value - target).abs() < 1e-4 && r.lhs.within_se(target, 3.0), "{r:?}");
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn one_dimensional_boundaries_are_points() {
    let interval = ConvexBody::polytope(vec![(vec![1.0], 1.0), (vec![-1.0], 0.5)]).unwrap();
    let pair = GraphPair::new(&interval, e1(1)).unwrap();
    let e = total_boundary_measure(&interval, &pair, &Budget::default(), 0).unwrap();
    assert!((e.value - phi(1.0) - phi(0.5)).abs() < 1e-12, "{e:?}");
}
