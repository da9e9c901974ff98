use super::cell::{boundary_term, reduced_cell_value, solve_cell_fw0, BoundarySide};
use super::report::{EnergyReport, JumpTerm};
use super::Integrands;
use crate::bv1d::{Side, BV1D};
use crate::error::{RelaxError, Result};
use crate::measure1d::Measure1D;
use crate::step::{merge_breaks, uniform_breaks};
use crate::vecops::{gauss_legendre_unit, is_zero, max_abs_diff};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Uniform cells merged into the quadrature mesh of the diffuse terms.
    pub base_cells: usize,
    /// Also run the direct cell solver with this many nodes at every
    /// concentration point and fail on disagreement.
    pub cross_check_nodes: Option<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            base_cells: 1024,
            cross_check_nodes: None,
        }
    }
}

/// Relaxed energy of `(u, v)` on an interval with default options.
pub fn evaluate_relaxed_1d(ints: &Integrands, u: &BV1D, v: &Measure1D) -> Result<EnergyReport> {
    evaluate_relaxed_1d_with(ints, u, v, &EvalOptions::default())
}

pub fn evaluate_relaxed_1d_with(
    ints: &Integrands,
    u: &BV1D,
    v: &Measure1D,
    opts: &EvalOptions,
) -> Result<EnergyReport> {
    let tol = 1e-12 * (1.0 + u.lo.abs().max(u.hi.abs()));
    if (u.lo - v.lo).abs() > tol || (u.hi - v.hi).abs() > tol {
        return Err(RelaxError::Representation(
            "u and v live on different intervals".into(),
        ));
    }
    if u.dim != ints.m() || v.dim != ints.d() || ints.wenv.dim != ints.m() {
        return Err(RelaxError::Representation(format!(
            "dimensions: u in R^{}, v in R^{}, integrands expect R^{} and R^{}",
            u.dim,
            v.dim,
            ints.m(),
            ints.d()
        )));
    }
    for a in &v.atoms {
        if u.cantor.iter().any(|n| n.x == a.x) {
            return Err(RelaxError::Representation(format!(
                "atom of v at {} sits on a Cantor quadrature node of u",
                a.x
            )));
        }
    }

    let mut rep = EnergyReport::default();
    let fine = diffuse_f2(ints, u, v, opts.base_cells.max(2));
    let coarse = diffuse_f2(ints, u, v, (opts.base_cells / 2).max(1));
    rep.diffuse_f2_term = fine;
    rep.quadrature_error = (fine - coarse).abs();

    let mut du = u.derivative();
    du.atoms.clear();
    rep.diffuse_w_term = du.nonlinear_transform(&ints.wenv, u.lo, u.hi);

    // concentration points: interior atoms of v and jumps of u
    let mut s0: Vec<f64> = v
        .atoms
        .iter()
        .filter(|a| a.x > u.lo && a.x < u.hi)
        .map(|a| a.x)
        .chain(u.jumps.iter().map(|j| j.x))
        .collect();
    s0.sort_by(f64::total_cmp);
    s0.dedup();
    let zero_b = vec![0.0; v.dim];
    for x in s0 {
        let a_minus = u.trace(x, Side::Left)?;
        let a_plus = u.trace(x, Side::Right)?;
        let b = v
            .atoms
            .iter()
            .find(|a| a.x == x)
            .map_or(zero_b.clone(), |a| a.weight.clone());
        let value = if is_zero(&b) && max_abs_diff(&a_plus, &a_minus) == 0.0 {
            0.0
        } else {
            let (val, _) = reduced_cell_value(ints, &a_plus, &a_minus, &b)?;
            if let Some(n) = opts.cross_check_nodes {
                let sol = solve_cell_fw0(ints, &a_plus, &a_minus, &b, n)?;
                if !sol.agree {
                    return Err(RelaxError::Numerical(format!(
                        "cell solvers disagree at x = {x}: direct {} vs reduced {}",
                        sol.value, sol.reduced_value
                    )));
                }
            }
            val
        };
        rep.jump_terms.push(JumpTerm {
            location: vec![x],
            value,
        });
    }

    if let Some(a) = v.atoms.iter().find(|a| a.x == u.lo) {
        let trace = u.trace(u.lo, Side::Right)?;
        rep.boundary_left = boundary_term(ints, BoundarySide::Left, &trace, &a.weight)?;
    }
    if let Some(a) = v.atoms.iter().find(|a| a.x == u.hi) {
        let trace = u.trace(u.hi, Side::Left)?;
        rep.boundary_right = boundary_term(ints, BoundarySide::Right, &trace, &a.weight)?;
    }
    rep.finalize();
    Ok(rep)
}

/// `int f1(u) d f2**(v^diff)` on a mesh merging `cells` uniform cells with
/// the breakpoints of `u` and `v`.
fn diffuse_f2(ints: &Integrands, u: &BV1D, v: &Measure1D, cells: usize) -> f64 {
    let base = uniform_breaks(u.lo, u.hi, cells);
    let mut lists: Vec<&[f64]> = vec![&base];
    if let Some(s) = &u.slope {
        lists.push(s.breaks());
    }
    if let Some(s) = &v.ac {
        lists.push(s.breaks());
    }
    let jumps: Vec<f64> = u
        .jumps
        .iter()
        .map(|j| j.x)
        .chain(u.cantor.iter().map(|n| n.x))
        .collect();
    lists.push(&jumps);
    let breaks = merge_breaks(&lists, 1e-14 * (u.hi - u.lo));
    let zero = vec![0.0; v.dim];
    let (gx, gw) = gauss_legendre_unit(3);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (l, r) = (w[0], w[1]);
        if r <= l {
            continue;
        }
        let mid = 0.5 * (l + r);
        let dens = v.ac.as_ref().map_or(zero.as_slice(), |s| s.value_at(mid));
        let e = ints.f2env.eval(dens);
        if e == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for (x, wt) in gx.iter().zip(gw) {
            acc += wt * ints.f1.eval(&u.value(l + x * (r - l)));
        }
        total += e * acc * (r - l);
    }
    for n in &v.singular {
        total += n.mass * ints.f1.eval(&u.value(n.x)) * ints.f2env.recession(&n.direction);
    }
    total
}

/// `L(A) + |v|(A) + |Du|(A)` on the closed interval `A = [a, b]`.
pub fn theta_measure(u: &BV1D, v: &Measure1D, a: f64, b: f64) -> f64 {
    let len = (b.min(u.hi) - a.max(u.lo)).max(0.0);
    len + v.variation_on(a, b) + u.derivative().variation_on(a, b)
}
