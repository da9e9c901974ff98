//! Recovery sequences: cell profiles pasted at concentration points in one
//! dimension, spikes with logarithmic cut-offs in two and three.

use super::field::{ball_radius, dyadic_s, Disk, ModifiedField, Spike, SpikedDensity};
use super::pair::{nearest, Params, SequencePair};
use crate::bv1d::{Side, BV1D};
use crate::error::{RelaxError, Result};
use crate::measure1d::Measure1D;
use crate::mesh::{MeasureND, MeshField};
use crate::relax::{
    boundary_minimizer, g_split, solve_cell_fw0, BoundarySide, CellSolution, Integrands,
};
use crate::step::StepFn;
use crate::vecops::{is_zero, max_abs_diff, norm, scale};

/// Relative length of the plateau carrying the mass in a boundary profile.
const BOUNDARY_PLATEAU: f64 = 0.25;

/// One concentration point resolved by a profile.
#[derive(Debug, Clone)]
enum Paste<'a> {
    Interior {
        x0: f64,
        cell: &'a CellSolution,
    },
    Boundary {
        side: BoundarySide,
        y: Vec<f64>,
        trace: Vec<f64>,
        b: Vec<f64>,
    },
}

/// Piecewise-constant function equal to `vals[i]` on `[pts[i], pts[i+1])`
/// and zero elsewhere on `[lo, hi]`.
fn local_step(lo: f64, hi: f64, pts: &[f64], vals: &[Vec<f64>], dim: usize) -> Result<StepFn> {
    let mut breaks = vec![lo];
    let mut values = Vec::new();
    if pts[0] > lo {
        breaks.push(pts[0]);
        values.push(vec![0.0; dim]);
    }
    for (i, v) in vals.iter().enumerate() {
        breaks.push(pts[i + 1]);
        values.push(v.clone());
    }
    if pts[pts.len() - 1] < hi {
        breaks.push(hi);
        values.push(vec![0.0; dim]);
    }
    StepFn::new(breaks, values)
}

fn add_opt(acc: Option<StepFn>, s: StepFn) -> Result<Option<StepFn>> {
    Ok(Some(match acc {
        None => s,
        Some(a) => a.add(&s)?,
    }))
}

/// Profile nodes, values and `v` breaks after a piecewise-linear change of
/// variable that translates the active part of the profile (where `u` leaves
/// its end values or `v` is nonzero) so that the `v` support is centred at 0.
/// Only the constant end pieces are stretched, so the pasted energy keeps
/// its total flat length and the mass sits at the concentration point.
fn centred(cell: &CellSolution) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let keep = (
        cell.x.clone(),
        cell.u_profile.clone(),
        cell.v_breaks.clone(),
    );
    let nz: Vec<usize> = (0..cell.v_profile.len())
        .filter(|&i| !is_zero(&cell.v_profile[i]))
        .collect();
    let (Some(&first), Some(&last)) = (nz.first(), nz.last()) else {
        return keep;
    };
    let (p0, p1) = (cell.v_breaks[first], cell.v_breaks[last + 1]);
    let n = cell.x.len();
    let flat = |i: usize, a: &[f64]| max_abs_diff(&cell.u_profile[i], a) <= 1e-12;
    let left = (0..n)
        .take_while(|&i| flat(i, &cell.a_minus))
        .last()
        .map_or(-1.0, |i| cell.x[i]);
    let right = (0..n)
        .rev()
        .take_while(|&i| flat(i, &cell.a_plus))
        .last()
        .map_or(1.0, |i| cell.x[i]);
    let (q0, q1) = if left > right {
        (p0, p1)
    } else {
        (left.min(p0), right.max(p1))
    };
    let shift = (-0.5 * (p0 + p1)).clamp(-1.0 - q0, 1.0 - q1);
    if shift == 0.0 {
        return keep;
    }
    let (r0, r1) = (q0 + shift, q1 + shift);
    let psi = |y: f64| {
        if y < q0 {
            -1.0 + (y + 1.0) * (r0 + 1.0) / (q0 + 1.0)
        } else if y > q1 {
            1.0 - (1.0 - y) * (1.0 - r1) / (1.0 - q1)
        } else {
            y + shift
        }
    };
    let mut xs: Vec<f64> = cell.x.clone();
    for k in [q0, q1] {
        if !xs.contains(&k) {
            xs.push(k);
        }
    }
    xs.sort_by(f64::total_cmp);
    let us = xs.iter().map(|&y| cell.u_at(y)).collect();
    (
        xs.into_iter().map(psi).collect(),
        us,
        cell.v_breaks.iter().map(|&y| psi(y)).collect(),
    )
}

fn paste(
    ints: &Integrands,
    u: &BV1D,
    v: &Measure1D,
    eps: f64,
    pastes: &[Paste],
    params: Params,
) -> Result<SequencePair> {
    let (lo, hi) = (u.lo, u.hi);
    let (m, d) = (u.dim, v.dim);
    let mut slope = u.slope.clone();
    let mut dens = v.ac.clone();
    let mut anchor = u.anchor.clone();
    for p in pastes {
        match p {
            Paste::Interior { x0, cell } => {
                let (xs, us, vb) = centred(cell);
                let pts: Vec<f64> = xs.iter().map(|y| x0 + eps * y).collect();
                let sl: Vec<Vec<f64>> = us
                    .windows(2)
                    .zip(xs.windows(2))
                    .map(|(w, x)| {
                        (0..m)
                            .map(|k| (w[1][k] - w[0][k]) / (eps * (x[1] - x[0])))
                            .collect()
                    })
                    .collect();
                slope = add_opt(slope, local_step(lo, hi, &pts, &sl, m)?)?;
                let vp: Vec<f64> = vb.iter().map(|y| x0 + eps * y).collect();
                let vv: Vec<Vec<f64>> =
                    cell.v_profile.iter().map(|v| scale(v, 1.0 / eps)).collect();
                dens = add_opt(dens, local_step(lo, hi, &vp, &vv, d)?)?;
            }
            Paste::Boundary { side, y, trace, b } => {
                let t = BOUNDARY_PLATEAU;
                let ramp: Vec<f64> = (0..m)
                    .map(|k| (trace[k] - y[k]) / (eps * (1.0 - t)))
                    .collect();
                let plateau = scale(b, 1.0 / (eps * t));
                match side {
                    BoundarySide::Left => {
                        anchor = y.clone();
                        let pts = [lo + eps * t, lo + eps];
                        slope = add_opt(slope, local_step(lo, hi, &pts, &[ramp], m)?)?;
                        dens = add_opt(
                            dens,
                            local_step(lo, hi, &[lo, lo + eps * t], &[plateau], d)?,
                        )?;
                    }
                    BoundarySide::Right => {
                        let pts = [hi - eps, hi - eps * t];
                        let down: Vec<f64> = ramp.iter().map(|r| -r).collect();
                        slope = add_opt(slope, local_step(lo, hi, &pts, &[down], m)?)?;
                        dens = add_opt(
                            dens,
                            local_step(lo, hi, &[hi - eps * t, hi], &[plateau], d)?,
                        )?;
                    }
                }
            }
        }
    }
    let uk = BV1D::new(lo, hi, anchor, slope, Vec::new(), Vec::new())?;
    let vk = match dens {
        Some(s) => s,
        None => StepFn::constant(lo, hi, vec![0.0; d])?,
    };
    SequencePair::line(ints, params, uk, vk)
}

/// Points carrying concentration: interior atoms of `v`, jumps of `u`, and
/// boundary atoms.
fn concentration_points(u: &BV1D, v: &Measure1D) -> Result<Vec<f64>> {
    if !u.cantor.is_empty() || !v.singular.is_empty() {
        return Err(RelaxError::Precondition(
            "Cantor parts cannot be pasted; approximate them by densities first".into(),
        ));
    }
    let mut pts: Vec<f64> = v
        .atoms
        .iter()
        .map(|a| a.x)
        .chain(u.jumps.iter().map(|j| j.x))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

fn check_separation(pts: &[f64], lo: f64, hi: f64, eps: f64) -> Result<()> {
    for (i, &x) in pts.iter().enumerate() {
        let boundary = x == lo || x == hi;
        let mut room = if boundary {
            hi - lo
        } else {
            (x - lo).min(hi - x)
        };
        if i > 0 {
            room = room.min(if boundary || pts[i - 1] == lo {
                x - pts[i - 1]
            } else {
                0.5 * (x - pts[i - 1])
            });
        }
        if i + 1 < pts.len() {
            let next = pts[i + 1];
            room = room.min(if boundary || next == hi {
                next - x
            } else {
                0.5 * (next - x)
            });
        }
        if eps >= room {
            return Err(RelaxError::Precondition(format!(
                "eps = {eps} is not below the room {room} around the concentration point {x}"
            )));
        }
    }
    Ok(())
}

fn atom_weight(v: &Measure1D, x: f64) -> Vec<f64> {
    v.atoms
        .iter()
        .find(|a| a.x == x)
        .map_or(vec![0.0; v.dim], |a| a.weight.clone())
}

/// Pastes the rescaled profile `cell` into `(x0 - eps, x0 + eps)` and
/// removes the jump of `u` and the atom of `v` at `x0`.
///
/// `x0` must be the only concentration point, and `eps` must be below the
/// distance to the boundary.
pub fn build_recovery_1d_jump(
    ints: &Integrands,
    u: &BV1D,
    v: &Measure1D,
    x0: f64,
    eps: f64,
    cell: &CellSolution,
    params: Params,
) -> Result<SequencePair> {
    let pts = concentration_points(u, v)?;
    if pts.iter().any(|&p| p != x0) {
        return Err(RelaxError::Precondition(format!(
            "concentration points other than {x0} are present"
        )));
    }
    if !(x0 > u.lo && x0 < u.hi) {
        return Err(RelaxError::Precondition(format!(
            "{x0} is not an interior point"
        )));
    }
    check_separation(&[x0], u.lo, u.hi, eps)?;
    let a_minus = u.trace(x0, Side::Left)?;
    let a_plus = u.trace(x0, Side::Right)?;
    let b = atom_weight(v, x0);
    let tol = 1e-9 * (1.0 + norm(&a_plus) + norm(&a_minus) + norm(&b));
    if max_abs_diff(&a_minus, &cell.a_minus) > tol
        || max_abs_diff(&a_plus, &cell.a_plus) > tol
        || max_abs_diff(&b, &cell.b) > tol
    {
        return Err(RelaxError::Precondition(format!(
            "the cell was solved for other data than at {x0}"
        )));
    }
    let rest = strip(u, v, &[x0])?;
    paste(
        ints,
        &rest.0,
        &rest.1,
        eps,
        &[Paste::Interior { x0, cell }],
        params,
    )
}

/// Removes the jumps and atoms at `pts`. Values to the right of a removed
/// jump drop by its height; the pasted profile adds it back.
fn strip(u: &BV1D, v: &Measure1D, pts: &[f64]) -> Result<(BV1D, Measure1D)> {
    let kept = u
        .jumps
        .iter()
        .filter(|j| !pts.contains(&j.x))
        .map(|j| (j.x, j.height()))
        .collect();
    let u2 = BV1D::from_increments(
        u.lo,
        u.hi,
        u.anchor.clone(),
        u.slope.clone(),
        kept,
        Vec::new(),
    )?;
    let atoms = v
        .atoms
        .iter()
        .filter(|a| !pts.contains(&a.x))
        .cloned()
        .collect();
    let v2 = Measure1D::new(v.lo, v.hi, v.dim, atoms, v.ac.clone(), v.singular.clone())?;
    Ok((u2, v2))
}

/// Solves the cell problem at every concentration point of `(u, v)` on a
/// mesh of `nodes` nodes and pastes all profiles at scale `eps`; boundary
/// atoms get a ramp to the optimal outer value.
pub fn build_recovery_1d(
    ints: &Integrands,
    u: &BV1D,
    v: &Measure1D,
    eps: f64,
    nodes: usize,
    params: Params,
) -> Result<SequencePair> {
    let pts = concentration_points(u, v)?;
    check_separation(&pts, u.lo, u.hi, eps)?;
    let mut cells = Vec::new();
    let mut bounds = Vec::new();
    for &x in &pts {
        let b = atom_weight(v, x);
        if x == u.lo || x == u.hi {
            let (side, trace) = if x == u.lo {
                (BoundarySide::Left, u.trace(x, Side::Right)?)
            } else {
                (BoundarySide::Right, u.trace(x, Side::Left)?)
            };
            let (_, y) = boundary_minimizer(ints, side, &trace, &b)?;
            bounds.push(Paste::Boundary { side, y, trace, b });
        } else {
            let a_minus = u.trace(x, Side::Left)?;
            let a_plus = u.trace(x, Side::Right)?;
            if is_zero(&b) && a_minus == a_plus {
                continue;
            }
            cells.push((x, solve_cell_fw0(ints, &a_plus, &a_minus, &b, nodes)?));
        }
    }
    let mut pastes: Vec<Paste> = cells
        .iter()
        .map(|(x0, cell)| Paste::Interior { x0: *x0, cell })
        .collect();
    pastes.extend(bounds);
    let (u2, v2) = strip(u, v, &pts)?;
    paste(ints, &u2, &v2, eps, &pastes, params)
}

/// Diagnostics of an n-dimensional recovery member.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryInfo {
    /// `eps` actually used after shrinking.
    pub epsilon: f64,
    pub retries: usize,
    /// `int |grad h_eps|`.
    pub grad_h_l1: f64,
    pub spikes: usize,
}

/// Spike-based recovery member for `(u, v)` on a mesh in two or three
/// dimensions, with parameters `eps`, `delta`, `eta` taken from `params`.
///
/// `u` is truncated at `1/delta`; each cell density is split as in the
/// coupling density `g`, the oscillating part is kept and the rest, together
/// with atoms and singular nodes, goes onto spikes of height `1/eps` whose
/// balls have volume `eps |mass|`. Around every spike `u` is pulled to the
/// minimizer of `f1` by a cut-off of radius at most `eta`.
pub fn build_recovery_nd(
    ints: &Integrands,
    u: &MeshField,
    v: &MeasureND,
    params: Params,
) -> Result<(SequencePair, RecoveryInfo)> {
    if !u.face_jumps.is_empty() {
        return Err(RelaxError::Precondition(
            "the construction needs a continuous field; smooth face jumps first".into(),
        ));
    }
    let grid = &u.grid;
    if v.grid != *grid {
        return Err(RelaxError::Representation(
            "u and v use different meshes".into(),
        ));
    }
    let n = grid.dim();
    if !(2..=3).contains(&n) {
        return Err(RelaxError::UnsupportedDimension {
            dim: n,
            reason: "spike recovery is built for n = 2, 3".into(),
        });
    }
    let (eps0, delta, eta) = (params.epsilon, params.delta, params.eta);
    if !(eps0 > 0.0 && delta > 0.0 && eta > 0.0) {
        return Err(RelaxError::Precondition(
            "eps, delta and eta must be positive".into(),
        ));
    }
    let d = v.dim;
    let plain = ModifiedField {
        base: u.clone(),
        cap: 1.0 / delta,
        u_min: ints.f1argmin.clone(),
        disks: Vec::new(),
    };
    let vol = grid.cell_volume();
    let mut base = vec![vec![0.0; d]; grid.num_cells()];
    let mut centers: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut push = |x: Vec<f64>, w: Vec<f64>| {
        if let Some(c) = centers
            .iter_mut()
            .find(|(y, _)| max_abs_diff(y, &x) <= 1e-12)
        {
            crate::vecops::add_assign(&mut c.1, &w);
        } else {
            centers.push((x, w));
        }
    };
    if let Some(ac) = &v.ac {
        for (cell, rho) in ac.iter().enumerate() {
            if is_zero(rho) {
                continue;
            }
            let c = grid.cell_center(cell);
            let (t, _) = plain.truncated_in(cell, &c);
            let split = g_split(ints.f1.eval(&t), &ints.f2env, ints.f1min, rho)?;
            base[cell] = split.b1.clone();
            let rest: Vec<f64> = rho
                .iter()
                .zip(&split.b1)
                .map(|(a, b)| vol * (a - b))
                .collect();
            if norm(&rest) > 1e-14 * (1.0 + norm(rho)) * vol {
                push(c, rest);
            }
        }
    }
    for a in &v.atoms {
        push(a.x.clone(), a.weight.clone());
    }
    for s in &v.singular {
        push(s.x.clone(), scale(&s.direction, s.mass));
    }
    centers.retain(|(_, w)| !is_zero(w));

    let points: Vec<Vec<f64>> = centers.iter().map(|c| c.0.clone()).collect();
    let rhos: Vec<f64> = centers
        .iter()
        .map(|(x, _)| {
            eta.min(0.5 * grid.boundary_distance(x))
                .min(0.5 * nearest(x, &points))
        })
        .collect();
    let mut eps = eps0;
    let mut retries = 0;
    loop {
        let ok = centers
            .iter()
            .zip(&rhos)
            .all(|((_, w), rho)| *rho > 0.0 && ball_radius(n, norm(w) * eps) < *rho);
        if ok {
            break;
        }
        if retries == 8 {
            return Err(RelaxError::Precondition(format!(
                "spike balls still reach the boundary or each other after 8 reductions of eps (now {eps})"
            )));
        }
        eps /= 16.0;
        retries += 1;
    }
    let mut disks = Vec::with_capacity(centers.len());
    let mut spikes = Vec::with_capacity(centers.len());
    for ((x, w), rho) in centers.iter().zip(&rhos) {
        let mass = norm(w);
        let r = ball_radius(n, mass * eps);
        disks.push(Disk {
            center: x.clone(),
            rho: *rho,
            s: dyadic_s(r / rho),
        });
        spikes.push(Spike {
            center: x.clone(),
            volume: mass * eps,
            density: scale(w, 1.0 / (mass * eps)),
        });
    }
    let field = ModifiedField { disks, ..plain };
    let info = RecoveryInfo {
        epsilon: eps,
        retries,
        grad_h_l1: field.grad_h_l1(),
        spikes: spikes.len(),
    };
    let dens = SpikedDensity::new(grid.clone(), d, base, spikes)?;
    let pair = SequencePair::mesh(
        ints,
        Params {
            epsilon: eps,
            ..params
        },
        field,
        dens,
    )?;
    Ok((pair, info))
}
