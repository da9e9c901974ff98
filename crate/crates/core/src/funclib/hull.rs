//! Lower convex hulls of sampled graphs.

/// Values at `xs` of the lower convex hull of the points `(xs[i], ys[i])`.
/// `xs` must be strictly increasing.
pub fn lower_hull_1d(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b when it lies on or above the chord a -> i
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for i in 0..n {
        while seg + 1 < hull.len() - 1 && xs[hull[seg + 1]] <= xs[i] {
            seg += 1;
        }
        if hull.len() == 1 {
            out.push(ys[hull[0]]);
            continue;
        }
        let (a, b) = (hull[seg], hull[seg + 1]);
        if i == a {
            out.push(ys[a]);
        } else if i == b {
            out.push(ys[b]);
        } else {
            let t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            out.push(ys[a] + t * (ys[b] - ys[a]));
        }
    }
    out
}

/// Minimum of `sum l_i f_i` over probability weights with `sum l_i p_i = x0`,
/// solved by a revised simplex on the 3-row system starting from `start`,
/// a basis of three points whose triangle contains `x0`.
///
/// Returns `None` if the start basis is infeasible or the iteration limit is
/// hit.
pub fn lower_hull_at(
    points: &[[f64; 2]],
    values: &[f64],
    x0: [f64; 2],
    start: [usize; 3],
) -> Option<f64> {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let mut basis = start;
    let col = |i: usize| [points[i][0], points[i][1], 1.0];
    let rhs = [x0[0], x0[1], 1.0];
    for iter in 0..20_000 {
        let m = [col(basis[0]), col(basis[1]), col(basis[2])];
        // columns of m are the basis columns
        let inv = invert3_columns(&m)?;
        let lambda = mul3(&inv, &rhs);
        if lambda.iter().any(|&l| l < -1e-9) {
            return None;
        }
        // dual y solves m^T y = f_B, i.e. y = inv^T f_B
        let fb = [values[basis[0]], values[basis[1]], values[basis[2]]];
        let y = [
            inv[0][0] * fb[0] + inv[1][0] * fb[1] + inv[2][0] * fb[2],
            inv[0][1] * fb[0] + inv[1][1] * fb[1] + inv[2][1] * fb[2],
            inv[0][2] * fb[0] + inv[1][2] * fb[1] + inv[2][2] * fb[2],
        ];
        let bland = iter > 200;
        let mut entering = None;
        let mut best = -tol;
        for (i, p) in points.iter().enumerate() {
            let r = values[i] - (y[0] * p[0] + y[1] * p[1] + y[2]);
            if r < best {
                entering = Some(i);
                if bland {
                    break;
                }
                best = r;
            }
        }
        let Some(e) = entering else {
            return Some(fb[0] * lambda[0] + fb[1] * lambda[1] + fb[2] * lambda[2]);
        };
        let d = mul3(&inv, &col(e));
        let mut leave = None;
        let mut theta = f64::INFINITY;
        for k in 0..3 {
            if d[k] > 1e-12 {
                let r = lambda[k].max(0.0) / d[k];
                if r < theta {
                    theta = r;
                    leave = Some(k);
                }
            }
        }
        basis[leave?] = e;
    }
    None
}

/// Inverse of the 3x3 matrix whose columns are `c[0], c[1], c[2]`, returned
/// row-major.
fn invert3_columns(c: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    // a[r][k] = c[k][r]
    let a = |r: usize, k: usize| c[k][r];
    let det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
        - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    if det.abs() < 1e-300 {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for k in 0..3 {
            let (r1, r2) = ((k + 1) % 3, (k + 2) % 3);
            let (k1, k2) = ((r + 1) % 3, (r + 2) % 3);
            inv[r][k] = (a(r1, k1) * a(r2, k2) - a(r1, k2) * a(r2, k1)) / det;
        }
    }
    Some(inv)
}

fn mul3(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}
