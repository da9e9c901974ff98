//! Concentrating an absolutely continuous measure onto narrow spikes.

use super::field::{ball_radius, Spike, SpikedDensity};
use crate::error::{RelaxError, Result};
use crate::measure1d::Measure1D;
use crate::mesh::{Grid, MeasureND};
use crate::step::{uniform_breaks, StepFn};

/// Splits the interval into `cells` equal parts and moves the mass of each
/// part onto the centered subinterval of relative width `eps`.
///
/// The result carries exactly the mass of every part and its support has
/// measure `eps` times the interval length.
pub fn concentrate_measure_1d(sigma: &Measure1D, eps: f64, cells: usize) -> Result<StepFn> {
    if !sigma.atoms.is_empty() || !sigma.singular.is_empty() {
        return Err(RelaxError::Precondition(
            "concentration needs an absolutely continuous measure".into(),
        ));
    }
    if !(eps > 0.0 && eps < 1.0) || cells == 0 {
        return Err(RelaxError::Precondition(format!(
            "need 0 < eps < 1 and cells > 0, got {eps}, {cells}"
        )));
    }
    let grid = uniform_breaks(sigma.lo, sigma.hi, cells);
    let d = sigma.dim;
    let mut breaks = vec![sigma.lo];
    let mut values = Vec::new();
    for w in grid.windows(2) {
        let mass = sigma
            .ac
            .as_ref()
            .map_or(vec![0.0; d], |s| s.integral_over(w[0], w[1]));
        let c = 0.5 * (w[0] + w[1]);
        let half = 0.5 * eps * (w[1] - w[0]);
        let (l, r) = (c - half, c + half);
        breaks.push(l);
        values.push(vec![0.0; d]);
        breaks.push(r);
        values.push(mass.iter().map(|m| m / (r - l)).collect());
        breaks.push(w[1]);
        values.push(vec![0.0; d]);
    }
    StepFn::new(breaks, values)
}

/// n-dimensional version: the box is split into `parts` blocks per axis and
/// the mass of each block is put on a ball of volume `eps` times the block
/// volume at its center.
pub fn concentrate_measure_nd(sigma: &MeasureND, eps: f64, parts: usize) -> Result<SpikedDensity> {
    if !sigma.atoms.is_empty() || !sigma.singular.is_empty() {
        return Err(RelaxError::Precondition(
            "concentration needs an absolutely continuous measure".into(),
        ));
    }
    let g = &sigma.grid;
    let n = g.dim();
    if parts == 0 || g.cells.iter().any(|c| c % parts != 0) {
        return Err(RelaxError::Precondition(format!(
            "{parts} blocks per axis do not divide the mesh {:?}",
            g.cells
        )));
    }
    let blocks = Grid::new(g.lo.clone(), g.hi.clone(), vec![parts; n])?;
    let bvol = blocks.cell_volume();
    let radius = ball_radius(n, eps * bvol);
    let half_side = (0..n)
        .map(|a| 0.5 * blocks.h(a))
        .fold(f64::INFINITY, f64::min);
    if !(eps > 0.0) || radius >= half_side {
        return Err(RelaxError::Precondition(format!(
            "eps = {eps} gives spikes wider than their block"
        )));
    }
    let d = sigma.dim;
    let mut mass = vec![vec![0.0; d]; blocks.num_cells()];
    if let Some(ac) = &sigma.ac {
        for (cell, v) in ac.iter().enumerate() {
            let b = blocks.locate(&g.cell_center(cell));
            crate::vecops::axpy(&mut mass[b], g.cell_volume(), v);
        }
    }
    let spikes = mass
        .into_iter()
        .enumerate()
        .filter(|(_, m)| m.iter().any(|x| *x != 0.0))
        .map(|(b, m)| Spike {
            center: blocks.cell_center(b),
            volume: eps * bvol,
            density: m.iter().map(|x| x / (eps * bvol)).collect(),
        })
        .collect();
    SpikedDensity::new(g.clone(), d, vec![vec![0.0; d]; g.num_cells()], spikes)
}
