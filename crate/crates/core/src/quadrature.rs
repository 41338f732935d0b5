//! One-dimensional Gauss rules and the tensor / mapped rules built from them.

use std::f64::consts::PI;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp;
        loop {
            let (mut p1, mut p2) = (1.0_f64, 0.0_f64);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Gauss-Hermite rule for the standard normal law: `sum w_i f(x_i) ~ E[f(Z)]`,
/// `Z ~ N(0, 1)`. Weights sum to one.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n >= 1);
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0_f64; n];
    let mut w = vec![0.0_f64; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PIM4, 0.0_f64);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 3e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // physicists' weight e^{-x^2} -> standard normal
    let nodes: Vec<f64> = x.iter().rev().map(|v| v * std::f64::consts::SQRT_2).collect();
    let weights: Vec<f64> = w.iter().rev().map(|v| v / PI.sqrt()).collect();
    Rule { nodes, weights }
}

/// Tensor product of `dim` copies of `rule`: returns (point, weight) pairs.
pub fn tensor(rule: &Rule, dim: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::with_capacity(dim), 1.0)];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(out.len() * rule.len());
        for (p, w) in &out {
            for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
                let mut q = p.clone();
                q.push(*x);
                next.push((q, w * wx));
            }
        }
        out = next;
    }
    out
}

/// Gauss-Legendre rule on `[0, len]` composed with `r = len * sin(pi s / 2)`.
///
/// The Jacobian vanishes at `r = len`, which absorbs inverse-square-root endpoint
/// singularities such as the slope blow-up of a graph at the rim of its domain.
pub fn rim_mapped(n: usize, len: f64) -> Rule {
    let gl = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
        let s = 0.5 * (x + 1.0);
        let a = 0.5 * PI * s;
        nodes.push(len * a.sin());
        weights.push(0.5 * w * len * 0.5 * PI * a.cos());
    }
    Rule { nodes, weights }
}

/// Product rule on the unit sphere S^{d-1} of R^d (d = 1, 2, 3): directions with
/// weights summing to the sphere's surface area.
pub fn sphere_rule(d: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    match d {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => {
            let m = (2 * order).max(8);
            (0..m)
                .map(|i| {
                    let t = 2.0 * PI * (i as f64 + 0.5) / m as f64;
                    (vec![t.cos(), t.sin()], 2.0 * PI / m as f64)
                })
                .collect()
        }
        3 => {
            let polar = gauss_legendre(order.max(4));
            let m = (2 * order).max(8);
            let mut out = Vec::with_capacity(polar.len() * m);
            for (&c, &wc) in polar.nodes.iter().zip(&polar.weights) {
                let s = (1.0 - c * c).max(0.0).sqrt();
                for i in 0..m {
                    let t = 2.0 * PI * (i as f64 + 0.5) / m as f64;
                    out.push((vec![s * t.cos(), s * t.sin(), c], wc * 2.0 * PI / m as f64));
                }
            }
            out
        }
        _ => panic!("sphere_rule supports d <= 3"),
    }
}
