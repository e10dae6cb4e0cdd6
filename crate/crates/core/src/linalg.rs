//! Small dense eigen-solvers: closed form for 2×2 / 3×3 symmetric matrices and
//! power iteration for the larger whole-frame covariance.

/// Covariance (divisor `n - 1`) of `n` samples with `d ≤ 3` coordinates each.
pub(crate) fn covariance_small<'a>(
    samples: impl Iterator<Item = &'a [f64]> + Clone,
    d: usize,
) -> [[f64; 3]; 3] {
    let mut mean = [0.0; 3];
    let mut n = 0usize;
    for s in samples.clone() {
        for c in 0..d {
            mean[c] += s[c];
        }
        n += 1;
    }
    for m in mean.iter_mut().take(d) {
        *m /= n as f64;
    }
    let mut cov = [[0.0; 3]; 3];
    for s in samples {
        for a in 0..d {
            let da = s[a] - mean[a];
            for b in a..d {
                cov[a][b] += da * (s[b] - mean[b]);
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for a in 0..d {
        for b in a..d {
            cov[a][b] /= denom;
            cov[b][a] = cov[a][b];
        }
    }
    cov
}

/// Unit eigenvector of the largest eigenvalue of a symmetric `d × d` matrix
/// (`d` in 1..=3), sign fixed so its largest-magnitude component is positive.
pub(crate) fn dominant_eigenvector_small(m: &[[f64; 3]; 3], d: usize) -> [f64; 3] {
    let mut v = match d {
        1 => [1.0, 0.0, 0.0],
        2 => dominant_2x2(m),
        3 => dominant_3x3(m),
        _ => panic!("closed-form eigensolve supports d <= 3, got {d}"),
    };
    let k = (0..d)
        .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
        .unwrap_or(0);
    if v[k] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn dominant_2x2(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let half = 0.5 * (a - c);
    let lambda = 0.5 * (a + c) + half.hypot(b);
    // Two algebraically equivalent candidates; keep the better conditioned one.
    let u = [lambda - c, b, 0.0];
    let w = [b, lambda - a, 0.0];
    let nu = u[0].hypot(u[1]);
    let nw = w[0].hypot(w[1]);
    if nu.max(nw) == 0.0 {
        return if a >= c { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    }
    normalized(if nu >= nw { u } else { w })
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm_sq(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// Largest eigenvalue of a symmetric 3×3 matrix (trigonometric solution).
fn largest_eigenvalue_3x3(m: &[[f64; 3]; 3]) -> f64 {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        return m[0][0].max(m[1][1]).max(m[2][2]);
    }
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = |i: usize, j: usize| (m[i][j] - if i == j { q } else { 0.0 }) / p;
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * phi.cos()
}

fn dominant_3x3(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        let k = (0..3)
            .max_by(|&a, &b| m[a][a].total_cmp(&m[b][b]).then(b.cmp(&a)))
            .unwrap_or(0);
        let mut v = [0.0; 3];
        v[k] = 1.0;
        return v;
    }
    let lambda = largest_eigenvalue_3x3(m);
    let rows = [
        [m[0][0] - lambda, m[0][1], m[0][2]],
        [m[1][0], m[1][1] - lambda, m[1][2]],
        [m[2][0], m[2][1], m[2][2] - lambda],
    ];
    let candidates = [
        cross(rows[0], rows[1]),
        cross(rows[0], rows[2]),
        cross(rows[1], rows[2]),
    ];
    let best = candidates
        .into_iter()
        .max_by(|a, b| norm_sq(*a).total_cmp(&norm_sq(*b)))
        .unwrap_or([1.0, 0.0, 0.0]);
    let scale = norm_sq(rows[0]).max(norm_sq(rows[1])).max(norm_sq(rows[2]));
    let mut v = if norm_sq(best) > 1e-24 * scale * scale && norm_sq(best) > 0.0 {
        normalized(best)
    } else {
        // Repeated top eigenvalue: any unit vector orthogonal to the
        // remaining row space is an eigenvector.
        let r = rows
            .into_iter()
            .max_by(|a, b| norm_sq(*a).total_cmp(&norm_sq(*b)))
            .unwrap_or([0.0; 3]);
        if norm_sq(r) == 0.0 {
            return [1.0, 0.0, 0.0];
        }
        let axis = if r[0].abs() <= r[1].abs() && r[0].abs() <= r[2].abs() {
            [1.0, 0.0, 0.0]
        } else if r[1].abs() <= r[2].abs() {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        normalized(cross(r, axis))
    };
    // One Rayleigh-style power step tightens the cross-product estimate.
    let mv = [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ];
    if norm_sq(mv) > 0.0 && lambda > 0.0 {
        let refined = normalized(mv);
        if refined.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() > 0.999 {
            v = refined;
        }
    }
    v
}

/// Outcome of [`power_iteration`].
#[derive(Debug, Clone)]
pub struct PowerIteration {
    pub vector: Vec<f64>,
    pub eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Dominant eigenvector of the symmetric positive semi-definite `n × n`
/// row-major matrix `m`, starting from the normalized all-ones vector.
pub fn power_iteration(m: &[f64], n: usize, tol: f64, max_iter: usize) -> PowerIteration {
    assert_eq!(m.len(), n * n, "matrix must be n x n");
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    let mut eigenvalue = 0.0;
    for iter in 1..=max_iter {
        for (r, out) in next.iter_mut().enumerate() {
            *out = m[r * n..(r + 1) * n].iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return PowerIteration {
                vector: v,
                eigenvalue: 0.0,
                iterations: iter,
                converged: false,
            };
        }
        eigenvalue = next.iter().zip(&v).map(|(a, b)| a * b).sum();
        next.iter_mut().for_each(|x| *x /= norm);
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut v, &mut next);
        if delta < tol {
            return PowerIteration {
                vector: v,
                eigenvalue,
                iterations: iter,
                converged: true,
            };
        }
    }
    PowerIteration {
        vector: v,
        eigenvalue,
        iterations: max_iter,
        converged: false,
    }
}
