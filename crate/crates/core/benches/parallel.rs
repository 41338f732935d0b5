use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cvxgauss::graph::{GraphPair, Which};
use cvxgauss::ibp::lhs_volume_integral;
use cvxgauss::par;
use cvxgauss::surface::{area_formula_with, minkowski_content_perimeter, Budget, GraphPoint};
use cvxgauss::{ConvexBody, Direction, GaussianModel, TestFunction};

fn modes() -> [(&'static str, bool); 2] {
    [("parallel", true), ("sequential", false)]
}

fn run<R>(parallel: bool, f: impl FnOnce() -> R) -> R {
    if parallel {
        f()
    } else {
        par::sequential(f)
    }
}

fn volume_side(c: &mut Criterion) {
    let body = ConvexBody::ball(3, 1.5).unwrap();
    let model = GaussianModel::new(3).unwrap();
    let psi = TestFunction::Tanh { weights: vec![1.0, 1.0, 0.0], bias: 0.0 };
    let k = Direction::axis(3, 1);
    let mut g = c.benchmark_group("lhs_volume_integral");
    g.sample_size(10);
    for (name, p) in modes() {
        g.bench_function(BenchmarkId::new(name, "ball3_200k"), |b| {
            b.iter(|| run(p, || lhs_volume_integral(&body, &psi, &k, &model, 200_000, 1).unwrap()))
        });
    }
    g.finish();
}

fn minkowski(c: &mut Criterion) {
    let body = ConvexBody::ball(2, 1.0).unwrap();
    let mut g = c.benchmark_group("minkowski_content");
    g.sample_size(10);
    for (name, p) in modes() {
        g.bench_function(BenchmarkId::new(name, "ball2_500k"), |b| {
            b.iter(|| run(p, || minkowski_content_perimeter(&body, &[0.04, 0.02, 0.01], 500_000, 1).unwrap()))
        });
    }
    g.finish();
}

fn area_quadrature(c: &mut Criterion) {
    let body = ConvexBody::ellipsoid(vec![1.0, 0.7, 0.5]).unwrap();
    let pair = GraphPair::new(&body, Direction::new(vec![0.2, 0.3, 1.0]).unwrap()).unwrap();
    let budget = Budget { order_3d: 16, ..Budget::default() };
    let mut g = c.benchmark_group("area_formula");
    g.sample_size(10);
    for (name, p) in modes() {
        g.bench_function(BenchmarkId::new(name, "ellipsoid3_upper"), |b| {
            b.iter(|| run(p, || area_formula_with(&pair.graph(Which::Upper), |_: &GraphPoint| 1.0, &budget, 0).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, volume_side, minkowski, area_quadrature);
criterion_main!(benches);
