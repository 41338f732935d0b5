//! Dense vector helpers for the small dimensions used throughout the crate.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn axpy_into(out: &mut [f64], s: f64, b: &[f64]) {
    for (o, y) in out.iter_mut().zip(b) {
        *o += s * y;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

/// Removes the components of `v` along each vector of the orthonormal set `basis`.
pub fn project_out(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut out = v.to_vec();
    for b in basis {
        let c = dot(&out, b);
        axpy_into(&mut out, -c, b);
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the span of the orthonormal set
/// `basis`, built by Gram-Schmidt over the coordinate axes.
pub fn complement_basis(n: usize, basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n.saturating_sub(basis.len()));
    let mut axes: Vec<usize> = (0..n).collect();
    // Axes most orthogonal to the given span first, for conditioning.
    axes.sort_by(|&i, &j| {
        let wi: f64 = basis.iter().map(|b| b[i] * b[i]).sum();
        let wj: f64 = basis.iter().map(|b| b[j] * b[j]).sum();
        wi.partial_cmp(&wj).unwrap().then(i.cmp(&j))
    });
    for i in axes {
        if out.len() + basis.len() == n {
            break;
        }
        let mut v = project_out(&unit(n, i), basis);
        v = project_out(&v, &out);
        // second pass for stability
        v = project_out(&project_out(&v, basis), &out);
        let len = norm(&v);
        if len > 1e-8 {
            out.push(scale(&v, 1.0 / len));
        }
    }
    out
}

/// Checks that `vs` is orthonormal to the given tolerance.
pub fn is_orthonormal(vs: &[Vec<f64>], tol: f64) -> bool {
    vs.iter().enumerate().all(|(i, a)| {
        vs.iter().enumerate().all(|(j, b)| {
            let target = if i == j { 1.0 } else { 0.0 };
            (dot(a, b) - target).abs() <= tol
        })
    })
}

/// Solves the small dense system `m x = rhs` by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let k = rhs.len();
    let scale_ref = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())?;
        if m[piv][col].abs() <= 1e-12 * scale_ref {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..k {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for c in col..k {
                    m[row][c] -= f * m[col][c];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let s: f64 = (row + 1..k).map(|c| m[row][c] * x[c]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    Some(x)
}
