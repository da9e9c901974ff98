//! Piecewise-constant interpolation of measures on dyadic grids.

use crate::error::{RelaxError, Result};
use crate::measure1d::Measure1D;
use crate::mesh::{Grid, MeasureND};
use crate::step::StepFn;
use crate::vecops::{add_assign, axpy};

/// Cell averages of `v` on the grid of mesh `2^-j` (absolute, so the end
/// cells may be partial).
///
/// Cells are half-open `[a, b)`; the last cell is closed so an atom at the
/// right endpoint stays inside. A cell lying in a single piece of the
/// density and carrying no point masses keeps that piece's value exactly.
pub fn interpolate_ij_1d(v: &Measure1D, j: u32) -> Result<StepFn> {
    let h = 2f64.powi(-(j as i32));
    let first = (v.lo / h).floor() as i64 + 1;
    let last = (v.hi / h).ceil() as i64 - 1;
    let mut breaks = vec![v.lo];
    for k in first..=last {
        let x = k as f64 * h;
        if x > v.lo && x < v.hi {
            breaks.push(x);
        }
    }
    breaks.push(v.hi);
    let cells = breaks.len() - 1;
    let mut values = Vec::with_capacity(cells);
    for c in 0..cells {
        let (a, b) = (breaks[c], breaks[c + 1]);
        let inside = |x: f64| x >= a && (x < b || (c + 1 == cells && x <= b));
        let atoms: Vec<&Vec<f64>> = v
            .atoms
            .iter()
            .filter(|p| inside(p.x))
            .map(|p| &p.weight)
            .collect();
        let sing: Vec<_> = v.singular.iter().filter(|p| inside(p.x)).collect();
        if atoms.is_empty() && sing.is_empty() {
            if let Some(s) = &v.ac {
                let i = s.piece_index(a);
                if s.breaks()[i + 1] >= b {
                    values.push(s.values()[i].clone());
                    continue;
                }
            }
        }
        let mut m =
            v.ac.as_ref()
                .map_or(vec![0.0; v.dim], |s| s.integral_over(a, b));
        for w in atoms {
            add_assign(&mut m, w);
        }
        for s in sing {
            axpy(&mut m, s.mass, &s.direction);
        }
        values.push(m.iter().map(|x| x / (b - a)).collect());
    }
    StepFn::new(breaks, values)
}

/// Length of `[a, b]` intersected with `[c, d]`.
fn overlap(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (b.min(d) - a.max(c)).max(0.0)
}

/// n-dimensional version on the dyadic grid of mesh `2^-j`; the box corners
/// must lie on that grid.
pub fn interpolate_ij_nd(v: &MeasureND, j: u32) -> Result<MeasureND> {
    let g = &v.grid;
    let n = g.dim();
    let scale = 2f64.powi(j as i32);
    let mut cells = Vec::with_capacity(n);
    for a in 0..n {
        let (lo, hi) = (g.lo[a] * scale, g.hi[a] * scale);
        if lo.fract() != 0.0 || hi.fract() != 0.0 {
            return Err(RelaxError::Precondition(format!(
                "box [{}, {}] on axis {a} is not aligned with the grid 2^-{j}",
                g.lo[a], g.hi[a]
            )));
        }
        cells.push((hi - lo) as usize);
    }
    let target = Grid::new(g.lo.clone(), g.hi.clone(), cells)?;
    let d = v.dim;
    let tvol = target.cell_volume();
    let mut mass = vec![vec![0.0; d]; target.num_cells()];
    // `source[t]` is the single source cell covering target cell `t`
    let mut source: Vec<Option<usize>> = vec![None; target.num_cells()];
    let mut mixed = vec![false; target.num_cells()];
    if let Some(ac) = &v.ac {
        for (cell, dens) in ac.iter().enumerate() {
            let idx = g.cell_multi(cell);
            // per-axis overlapping target ranges
            let mut ranges = Vec::with_capacity(n);
            for a in 0..n {
                let l = g.lo[a] + g.h(a) * idx[a] as f64;
                let r = l + g.h(a);
                let k0 = (((l - g.lo[a]) / target.h(a)).floor() as usize).min(target.cells[a] - 1);
                let mut list = Vec::new();
                let mut k = k0;
                while k < target.cells[a] {
                    let tl = g.lo[a] + target.h(a) * k as f64;
                    if tl >= r {
                        break;
                    }
                    let o = overlap(l, r, tl, tl + target.h(a));
                    if o > 0.0 {
                        list.push((k, o, o >= target.h(a) * (1.0 - 1e-12)));
                    }
                    k += 1;
                }
                ranges.push(list);
            }
            let total: usize = ranges.iter().map(|r| r.len()).product();
            for q in 0..total {
                let mut rem = q;
                let mut tidx = Vec::with_capacity(n);
                let mut vol = 1.0;
                let mut covers = true;
                for r in &ranges {
                    let (k, o, full) = r[rem % r.len()];
                    rem /= r.len();
                    tidx.push(k);
                    vol *= o;
                    covers &= full;
                }
                let t = target.cell_index(&tidx);
                axpy(&mut mass[t], vol, dens);
                if covers && source[t].is_none() && !mixed[t] {
                    source[t] = Some(cell);
                } else {
                    mixed[t] = true;
                    source[t] = None;
                }
            }
        }
    }
    let mut touched = vec![false; target.num_cells()];
    for a in &v.atoms {
        let t = target.locate(&a.x);
        add_assign(&mut mass[t], &a.weight);
        touched[t] = true;
    }
    for s in &v.singular {
        let t = target.locate(&s.x);
        axpy(&mut mass[t], s.mass, &s.direction);
        touched[t] = true;
    }
    let ac = (0..target.num_cells())
        .map(|t| match (source[t], touched[t], &v.ac) {
            (Some(c), false, Some(ac)) => ac[c].clone(),
            _ => mass[t].iter().map(|m| m / tvol).collect(),
        })
        .collect();
    MeasureND::new(target, d, Some(ac), Vec::new(), Vec::new())
}
