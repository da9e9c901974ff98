//! The cell problem at a concentration point in one dimension.
//!
//! For recession integrands `rho = (f2**)^inf` and `rho_w = (W**)^inf` the
//! cell value is
//! `inf { int f1(u) rho(v) + rho_w(u') : u(-1) = a-, u(1) = a+, int v = b }`.
//! Two solvers are provided: a reduced scan over the value `z` that `u`
//! takes where the mass sits, and a direct minimization of the discretized
//! objective on a nodal mesh.

use super::Integrands;
use crate::error::{RelaxError, Result};
use crate::minimize::{minimize_in_box, minimize_with_grid};
use crate::vecops::{norm, scale, sub};

/// Relative agreement required between the two solvers.
const AGREE_REL: f64 = 0.02;
const NODE_GRID: usize = 201;
const NODE_GRID_2D: usize = 21;

#[derive(Debug, Clone, PartialEq)]
pub struct CellSolution {
    pub a_plus: Vec<f64>,
    pub a_minus: Vec<f64>,
    pub b: Vec<f64>,
    /// Mesh node count used by the direct solver.
    pub nodes: usize,
    /// Direct-solver value (an upper bound of the cell value).
    pub value: f64,
    /// Reduced-scan value.
    pub reduced_value: f64,
    /// Best intermediate value from the reduced scan.
    pub z_star: Vec<f64>,
    /// Abscissae of the piecewise-linear profile on [-1, 1].
    pub x: Vec<f64>,
    pub u_profile: Vec<Vec<f64>>,
    /// Breakpoints and values of the piecewise-constant `v` profile.
    pub v_breaks: Vec<f64>,
    pub v_profile: Vec<Vec<f64>>,
    /// The two solvers agree within tolerance and the scan is below the
    /// direct value.
    pub agree: bool,
    pub outer_iterations: usize,
}

impl CellSolution {
    /// `int v_profile` over [-1, 1].
    pub fn mass(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.b.len()];
        for (w, v) in self.v_breaks.windows(2).zip(&self.v_profile) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += (w[1] - w[0]) * x;
            }
        }
        out
    }

    /// Profile value at `y` in [-1, 1].
    pub fn u_at(&self, y: f64) -> Vec<f64> {
        let k = self
            .x
            .partition_point(|&s| s <= y)
            .clamp(1, self.x.len() - 1);
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let t = if x1 > x0 {
            ((y - x0) / (x1 - x0)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        self.u_profile[k - 1]
            .iter()
            .zip(&self.u_profile[k])
            .map(|(a, b)| a + t * (b - a))
            .collect()
    }
}

fn z_radius(points: &[&[f64]]) -> f64 {
    let r = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    3.0f64.max(r + 3.0)
}

fn check_m(ints: &Integrands) -> Result<usize> {
    let m = ints.m();
    if m > 2 {
        return Err(RelaxError::UnsupportedDimension {
            dim: m,
            reason: "cell scans are implemented for m <= 2".into(),
        });
    }
    if ints.wenv.dim != m {
        return Err(RelaxError::Representation(format!(
            "W acts on R^{}, the one-dimensional cell needs R^{m}",
            ints.wenv.dim
        )));
    }
    Ok(m)
}

/// `min_z f1(z) rho(b) + rho_w(z - a-) + rho_w(a+ - z)` and a minimizing `z`.
///
/// The scan covers the box of radius `max(3, |a| + 3)` around the origin and
/// always includes `z = a-` and `z = a+`, so the degenerate values are exact.
pub fn reduced_cell_value(
    ints: &Integrands,
    a_plus: &[f64],
    a_minus: &[f64],
    b: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let m = check_m(ints)?;
    let rho_b = ints.f2env.recession(b);
    let obj = |z: &[f64]| {
        let f = if rho_b == 0.0 {
            0.0
        } else {
            ints.f1.eval(z) * rho_b
        };
        f + ints.wenv.recession(&sub(z, a_minus)) + ints.wenv.recession(&sub(a_plus, z))
    };
    let mut extra = vec![a_minus.to_vec(), a_plus.to_vec()];
    let r = z_radius(&[a_plus, a_minus]);
    if norm(&ints.f1argmin) <= r {
        extra.push(ints.f1argmin.clone());
    }
    let center = vec![0.0; m];
    Ok(minimize_in_box(obj, &center, r, &extra))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySide {
    Left,
    Right,
}

/// Boundary contribution of an atom `b` at an endpoint where `u` has trace
/// `trace`: `inf_z` of the cell value with the outer trace free.
pub fn boundary_term(
    ints: &Integrands,
    side: BoundarySide,
    trace: &[f64],
    b: &[f64],
) -> Result<f64> {
    Ok(boundary_minimizer(ints, side, trace, b)?.0)
}

/// [`boundary_term`] together with the optimal outer value `y`.
pub fn boundary_minimizer(
    ints: &Integrands,
    side: BoundarySide,
    trace: &[f64],
    b: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let m = check_m(ints)?;
    if norm(b) == 0.0 {
        return Ok((0.0, trace.to_vec()));
    }
    let rho_b = ints.f2env.recession(b);
    let obj = |y: &[f64]| {
        let w = match side {
            BoundarySide::Left => ints.wenv.recession(&sub(trace, y)),
            BoundarySide::Right => ints.wenv.recession(&sub(y, trace)),
        };
        ints.f1.eval(y) * rho_b + w
    };
    let mut extra = vec![trace.to_vec()];
    let r = z_radius(&[trace]);
    if norm(&ints.f1argmin) <= r {
        extra.push(ints.f1argmin.clone());
    }
    Ok(minimize_in_box(obj, &vec![0.0; m], r, &extra))
}

/// Solves the cell problem with both solvers on a mesh of `nodes` nodes.
///
/// The direct solver alternates an exact `v`-step (all mass at the node of
/// smallest `f1(u_i)`) with a sweep of exact one-node minimizations of `u`.
/// The returned profile realizes the discrete value exactly: `u` is given a
/// short plateau at the charged node and `v` is spread uniformly on it.
pub fn solve_cell_fw0(
    ints: &Integrands,
    a_plus: &[f64],
    a_minus: &[f64],
    b: &[f64],
    nodes: usize,
) -> Result<CellSolution> {
    let m = check_m(ints)?;
    if nodes < 8 {
        return Err(RelaxError::Precondition(format!(
            "cell mesh needs at least 8 nodes, got {nodes}"
        )));
    }
    if a_plus.len() != m || a_minus.len() != m || b.len() != ints.d() {
        return Err(RelaxError::Representation(
            "cell data has wrong dimensions".into(),
        ));
    }
    let (reduced_value, z_star) = reduced_cell_value(ints, a_plus, a_minus, b)?;

    let n = nodes;
    let dx = 2.0 / (n - 1) as f64;
    let rho_b = ints.f2env.recession(b);
    let rw = |d: &[f64]| ints.wenv.recession(d);
    let f1 = |z: &[f64]| ints.f1.eval(z);
    let mut u: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            a_minus
                .iter()
                .zip(a_plus)
                .map(|(l, r)| l + t * (r - l))
                .collect()
        })
        .collect();
    u[0] = a_minus.to_vec();
    u[n - 1] = a_plus.to_vec();
    let objective = |u: &[Vec<f64>], fu: &[f64]| {
        let fmin = fu.iter().copied().fold(f64::INFINITY, f64::min);
        let mut j = if rho_b == 0.0 { 0.0 } else { fmin * rho_b };
        for w in u.windows(2) {
            j += rw(&sub(&w[1], &w[0]));
        }
        j
    };
    let r = z_radius(&[a_plus, a_minus]);
    // Single-node moves cannot shift a peak, so start from the best profile
    // a-, .., a-, z, a+, .., a+ with z on a grid that refines with the mesh.
    let mut fu: Vec<f64> = u.iter().map(|z| f1(z)).collect();
    let mut j = objective(&u, &fu);
    let per_axis = if m == 1 { n + 1 } else { n / 8 + 1 };
    let mut peaks: Vec<Vec<f64>> = vec![a_minus.to_vec(), a_plus.to_vec(), ints.f1argmin.clone()];
    for q in 0..per_axis.pow(m as u32) {
        let mut rem = q;
        peaks.push(
            (0..m)
                .map(|_| {
                    let k = rem % per_axis;
                    rem /= per_axis;
                    -r + 2.0 * r * k as f64 / (per_axis - 1) as f64
                })
                .collect(),
        );
    }
    let c = n / 2;
    let tent = |z: &[f64]| -> (Vec<Vec<f64>>, Vec<f64>, f64) {
        let t: Vec<Vec<f64>> = (0..n)
            .map(|i| match i.cmp(&c) {
                std::cmp::Ordering::Less => a_minus.to_vec(),
                std::cmp::Ordering::Equal => z.to_vec(),
                std::cmp::Ordering::Greater => a_plus.to_vec(),
            })
            .collect();
        let ft: Vec<f64> = t.iter().map(|z| f1(z)).collect();
        let jt = objective(&t, &ft);
        (t, ft, jt)
    };
    let mut best_peak = (f64::INFINITY, a_minus.to_vec());
    for z in peaks.iter().filter(|z| norm(z) <= r * (m as f64).sqrt()) {
        let jt = tent(z).2;
        if jt < best_peak.0 {
            best_peak = (jt, z.clone());
        }
    }
    // polish from the best grid peak, the traces and the argmin
    let step = 2.0 * r / (per_axis - 1) as f64;
    for z0 in [
        best_peak.1,
        a_minus.to_vec(),
        a_plus.to_vec(),
        ints.f1argmin.clone(),
    ] {
        let (_, z) = minimize_with_grid(
            |z| tent(z).2,
            &z0,
            2.0 * step,
            std::slice::from_ref(&z0),
            81,
        );
        let (t, ft, jt) = tent(&z);
        if jt < j {
            (u, fu, j) = (t, ft, jt);
        }
    }
    let mut iterations = 0;
    for it in 0..200 {
        iterations = it + 1;
        let order: Vec<usize> = if it % 2 == 0 {
            (1..n - 1).collect()
        } else {
            (1..n - 1).rev().collect()
        };
        for i in order {
            let others = fu
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, v)| *v)
                .fold(f64::INFINITY, f64::min);
            let (prev, next) = (u[i - 1].clone(), u[i + 1].clone());
            let local = |y: &[f64]| {
                let c = if rho_b == 0.0 {
                    0.0
                } else {
                    f1(y).min(others) * rho_b
                };
                c + rw(&sub(y, &prev)) + rw(&sub(&next, y))
            };
            let current = local(&u[i]);
            let mut extra = vec![
                u[i].clone(),
                prev.clone(),
                next.clone(),
                a_minus.to_vec(),
                a_plus.to_vec(),
            ];
            if norm(&ints.f1argmin) <= r {
                extra.push(ints.f1argmin.clone());
            }
            let grid = if m == 1 { NODE_GRID } else { NODE_GRID_2D };
            let (v, y) = minimize_with_grid(local, &vec![0.0; m], r, &extra, grid);
            if v < current - 1e-15 * (1.0 + current.abs()) {
                fu[i] = f1(&y);
                u[i] = y;
            }
        }
        let jn = objective(&u, &fu);
        if jn > j * (1.0 + 1e-12) + 1e-300 {
            return Err(RelaxError::Numerical(format!(
                "cell solver objective increased from {j} to {jn} at iteration {it}"
            )));
        }
        let done = j - jn <= 1e-13 * (1.0 + j.abs());
        j = jn;
        if done {
            break;
        }
    }

    // charged node: smallest f1, ties to the smallest index
    let mut star = 0;
    for k in 1..n {
        if fu[k] < fu[star] {
            star = k;
        }
    }
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            if i == n - 1 {
                1.0
            } else {
                -1.0 + dx * i as f64
            }
        })
        .collect();
    let theta = 0.5 * dx;
    let (pl, pr) = if star == 0 {
        (-1.0, -1.0 + theta)
    } else if star == n - 1 {
        (1.0 - theta, 1.0)
    } else {
        (xs[star] - 0.5 * theta, xs[star] + 0.5 * theta)
    };
    let mut x = Vec::with_capacity(n + 2);
    let mut up = Vec::with_capacity(n + 2);
    for i in 0..n {
        if i == star {
            if star > 0 {
                x.push(pl);
                up.push(u[i].clone());
            }
            if star < n - 1 {
                x.push(pr);
                up.push(u[i].clone());
            }
            if star == 0 {
                x.insert(0, -1.0);
                up.insert(0, u[0].clone());
            }
            if star == n - 1 {
                x.push(1.0);
                up.push(u[n - 1].clone());
            }
        } else {
            x.push(xs[i]);
            up.push(u[i].clone());
        }
    }
    let d = b.len();
    let dens = scale(b, 1.0 / (pr - pl));
    let mut v_breaks = vec![-1.0];
    let mut v_profile = Vec::new();
    if pl > -1.0 {
        v_breaks.push(pl);
        v_profile.push(vec![0.0; d]);
    }
    v_breaks.push(pr);
    v_profile.push(dens);
    if pr < 1.0 {
        v_breaks.push(1.0);
        v_profile.push(vec![0.0; d]);
    }

    let tol = AGREE_REL * reduced_value.abs().max(1e-12) + 1e-9;
    let sandwich = reduced_value <= j + 1e-9 * (1.0 + j.abs());
    let agree = sandwich && j - reduced_value <= tol;
    Ok(CellSolution {
        a_plus: a_plus.to_vec(),
        a_minus: a_minus.to_vec(),
        b: b.to_vec(),
        nodes,
        value: j,
        reduced_value,
        z_star,
        x,
        u_profile: up,
        v_breaks,
        v_profile,
        agree,
        outer_iterations: iterations,
    })
}
