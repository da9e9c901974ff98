//! Comparison sequences that only smear the singular parts, with no
//! concentration structure.

use super::field::{ModifiedField, SpikedDensity};
use super::interp::interpolate_ij_nd;
use super::pair::{Params, SequencePair};
use crate::bv1d::BV1D;
use crate::error::{RelaxError, Result};
use crate::measure1d::Measure1D;
use crate::mesh::{MeasureND, MeshField};
use crate::relax::Integrands;
use crate::step::StepFn;
use crate::vecops::{axpy, scale};

/// Sub-pieces used to represent one smeared point mass in 1D.
const PIECES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// Uniform on `[-w, w]`.
    Box,
    /// `(1 - |t|/w) / w` on `[-w, w]`.
    Tent,
}

impl Kernel {
    pub const ALL: [Kernel; 2] = [Kernel::Box, Kernel::Tent];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Box => "box",
            Kernel::Tent => "tent",
        }
    }

    /// Kernel mass on `(-inf, t]`.
    fn cdf(self, w: f64, t: f64) -> f64 {
        let t = t.clamp(-w, w);
        match self {
            Kernel::Box => (t + w) / (2.0 * w),
            Kernel::Tent if t <= 0.0 => (t + w) * (t + w) / (2.0 * w * w),
            Kernel::Tent => 1.0 - (w - t) * (w - t) / (2.0 * w * w),
        }
    }

    /// Kernel mass on `[a, b]` for the kernel centered at `c`.
    fn mass(self, w: f64, c: f64, a: f64, b: f64) -> f64 {
        self.cdf(w, b - c) - self.cdf(w, a - c)
    }
}

/// Point masses smeared by the kernel at width `w`, centers moved inward
/// so the kernel support stays in `[lo, hi]`.
fn smear(
    lo: f64,
    hi: f64,
    points: &[(f64, Vec<f64>)],
    w: f64,
    kernel: Kernel,
    dim: usize,
) -> Result<Option<StepFn>> {
    let mut acc: Option<StepFn> = None;
    for (x, weight) in points {
        let c = x.clamp(lo + w, hi - w);
        let mut breaks = Vec::with_capacity(PIECES + 3);
        let mut values = Vec::with_capacity(PIECES + 2);
        breaks.push(lo);
        if c - w > lo {
            breaks.push(c - w);
            values.push(vec![0.0; dim]);
        }
        for i in 0..PIECES {
            let a = c - w + 2.0 * w * i as f64 / PIECES as f64;
            let b = if i + 1 == PIECES {
                c + w
            } else {
                c - w + 2.0 * w * (i + 1) as f64 / PIECES as f64
            };
            breaks.push(b);
            values.push(scale(weight, kernel.mass(w, c, a, b) / (b - a)));
        }
        if c + w < hi {
            breaks.push(hi);
            values.push(vec![0.0; dim]);
        }
        let s = StepFn::new(breaks, values)?;
        acc = Some(match acc {
            None => s,
            Some(a) => a.add(&s)?,
        });
    }
    Ok(acc)
}

/// Smooths `(u, v)` at width `w`: jumps and Cantor steps of `u` become
/// ramps of width `2w`, atoms and singular nodes of `v` are replaced by
/// kernel bumps.
pub fn mollify_1d(
    ints: &Integrands,
    u: &BV1D,
    v: &Measure1D,
    w: f64,
    kernel: Kernel,
    params: Params,
) -> Result<SequencePair> {
    if !(w > 0.0 && 2.0 * w < u.hi - u.lo) {
        return Err(RelaxError::Precondition(format!(
            "width {w} does not fit the interval"
        )));
    }
    let (lo, hi) = (u.lo, u.hi);
    let steps: Vec<(f64, Vec<f64>)> = u
        .jumps
        .iter()
        .map(|j| (j.x, j.height()))
        .chain(u.cantor.iter().map(|n| (n.x, scale(&n.direction, n.mass))))
        .collect();
    let mut slope = u.slope.clone();
    if let Some(s) = smear(lo, hi, &steps, w, Kernel::Box, u.dim)? {
        slope = Some(match slope {
            None => s,
            Some(a) => a.add(&s)?,
        });
    }
    let uk = BV1D::new(lo, hi, u.anchor.clone(), slope, Vec::new(), Vec::new())?;
    let masses: Vec<(f64, Vec<f64>)> = v
        .atoms
        .iter()
        .map(|a| (a.x, a.weight.clone()))
        .chain(
            v.singular
                .iter()
                .map(|s| (s.x, scale(&s.direction, s.mass))),
        )
        .collect();
    let mut dens = v.ac.clone();
    if let Some(s) = smear(lo, hi, &masses, w, kernel, v.dim)? {
        dens = Some(match dens {
            None => s,
            Some(a) => a.add(&s)?,
        });
    }
    let vk = match dens {
        Some(s) => s,
        None => StepFn::constant(lo, hi, vec![0.0; v.dim])?,
    };
    SequencePair::line(ints, params, uk, vk)
}

/// Two- or three-dimensional version on the dyadic grid of mesh `2^-j`:
/// the density part is averaged onto that grid and point masses become
/// product kernels of half-width two cells. `u` must be continuous and is
/// kept as it is.
pub fn mollify_nd(
    ints: &Integrands,
    u: &MeshField,
    v: &MeasureND,
    j: u32,
    kernel: Kernel,
    params: Params,
) -> Result<SequencePair> {
    if !u.face_jumps.is_empty() {
        return Err(RelaxError::Precondition(
            "mollification needs a continuous field".into(),
        ));
    }
    let dens_only = MeasureND::new(v.grid.clone(), v.dim, v.ac.clone(), Vec::new(), Vec::new())?;
    let base = interpolate_ij_nd(&dens_only, j)?;
    let g = base.grid.clone();
    let n = g.dim();
    let w = 2.0 * (0..n).map(|a| g.h(a)).fold(0.0, f64::max);
    if (0..n).any(|a| 2.0 * w >= g.hi[a] - g.lo[a]) {
        return Err(RelaxError::Precondition(format!(
            "grid 2^-{j} is too coarse for the kernel"
        )));
    }
    let mut cells = base
        .ac
        .clone()
        .unwrap_or_else(|| vec![vec![0.0; v.dim]; g.num_cells()]);
    let vol = g.cell_volume();
    let masses = v
        .atoms
        .iter()
        .map(|a| (a.x.clone(), a.weight.clone()))
        .chain(
            v.singular
                .iter()
                .map(|s| (s.x.clone(), scale(&s.direction, s.mass))),
        );
    for (x, weight) in masses {
        let c: Vec<f64> = (0..n)
            .map(|a| x[a].clamp(g.lo[a] + w, g.hi[a] - w))
            .collect();
        // per-axis cell weights
        let axes: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|a| {
                (0..g.cells[a])
                    .filter_map(|k| {
                        let l = g.lo[a] + g.h(a) * k as f64;
                        let m = kernel.mass(w, c[a], l, l + g.h(a));
                        (m > 0.0).then_some((k, m))
                    })
                    .collect()
            })
            .collect();
        let total: usize = axes.iter().map(|r| r.len()).product();
        for q in 0..total {
            let mut rem = q;
            let mut idx = Vec::with_capacity(n);
            let mut m = 1.0;
            for r in &axes {
                let (k, mk) = r[rem % r.len()];
                rem /= r.len();
                idx.push(k);
                m *= mk;
            }
            axpy(&mut cells[g.cell_index(&idx)], m / vol, &weight);
        }
    }
    let dens = SpikedDensity::new(g, v.dim, cells, Vec::new())?;
    SequencePair::mesh(ints, params, ModifiedField::plain(u.clone()), dens)
}
