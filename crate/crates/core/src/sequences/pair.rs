use super::field::{disk_quadrature, ModifiedField, SpikedDensity};
use crate::bv1d::BV1D;
use crate::error::{RelaxError, Result};
use crate::mesh::Grid;
use crate::relax::Integrands;
use crate::step::{merge_breaks, uniform_breaks, StepFn};
use crate::vecops::{gauss_legendre_unit, norm, sub};

/// Parameters of one member of a sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
}

impl Params {
    pub fn new(k: usize, epsilon: f64, delta: f64, eta: f64) -> Self {
        Self {
            k,
            epsilon,
            delta,
            eta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeqU {
    Line(BV1D),
    Mesh(ModifiedField),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeqV {
    Line(StepFn),
    Mesh(SpikedDensity),
}

/// A Sobolev function and an integrable density, with the energy under the
/// original integrands.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencePair {
    pub params: Params,
    pub u: SeqU,
    pub v: SeqV,
    pub energy: f64,
}

/// The three integrands as plain functions.
pub struct Densities<'a> {
    pub f1: &'a dyn Fn(&[f64]) -> f64,
    pub f2: &'a dyn Fn(&[f64]) -> f64,
    pub w: &'a dyn Fn(&[f64]) -> f64,
}

const BASE_CELLS: usize = 1024;

impl SequencePair {
    pub fn line(ints: &Integrands, params: Params, u: BV1D, v: StepFn) -> Result<Self> {
        if !u.is_sobolev() {
            return Err(RelaxError::Precondition(
                "sequence members must have no jump or Cantor part".into(),
            ));
        }
        let tol = 1e-12 * (1.0 + u.lo.abs().max(u.hi.abs()));
        if (u.lo - v.lo()).abs() > tol || (u.hi - v.hi()).abs() > tol {
            return Err(RelaxError::Representation(
                "u and v live on different intervals".into(),
            ));
        }
        let mut p = Self {
            params,
            u: SeqU::Line(u),
            v: SeqV::Line(v),
            energy: 0.0,
        };
        p.energy = p.original_energy(ints)?;
        Ok(p)
    }

    pub fn mesh(
        ints: &Integrands,
        params: Params,
        u: ModifiedField,
        v: SpikedDensity,
    ) -> Result<Self> {
        if !u.base.face_jumps.is_empty() {
            return Err(RelaxError::Precondition(
                "sequence members must have no face jumps".into(),
            ));
        }
        let mut p = Self {
            params,
            u: SeqU::Mesh(u),
            v: SeqV::Mesh(v),
            energy: 0.0,
        };
        p.energy = p.original_energy(ints)?;
        Ok(p)
    }

    /// `int f1(u) f2(v) + W(grad u)` for the given densities.
    pub fn energy_under(&self, d: &Densities) -> Result<f64> {
        match (&self.u, &self.v) {
            (SeqU::Line(u), SeqV::Line(v)) => Ok(line_energy(u, v, d)),
            (SeqU::Mesh(u), SeqV::Mesh(v)) => {
                integrate_mesh(u, v, &|_, uu, g, vv| (d.f1)(uu) * (d.f2)(vv) + (d.w)(g))
            }
            _ => Err(RelaxError::Representation(
                "u and v have different dimensions".into(),
            )),
        }
    }

    /// Energy under the original integrands.
    pub fn original_energy(&self, ints: &Integrands) -> Result<f64> {
        let f1 = |x: &[f64]| ints.f1.eval(x);
        let f2 = |x: &[f64]| ints.f2.eval(x);
        let w = |x: &[f64]| ints.w.eval(x);
        self.energy_under(&Densities {
            f1: &f1,
            f2: &f2,
            w: &w,
        })
    }

    /// Energy with `f2**` and `W**` in place of `f2` and `W`.
    pub fn envelope_energy(&self, ints: &Integrands) -> Result<f64> {
        let f1 = |x: &[f64]| ints.f1.eval(x);
        let f2 = |x: &[f64]| ints.f2env.eval(x);
        let w = |x: &[f64]| ints.wenv.eval(x);
        self.energy_under(&Densities {
            f1: &f1,
            f2: &f2,
            w: &w,
        })
    }

    /// `L({v != 0})`.
    pub fn support_measure(&self) -> f64 {
        match &self.v {
            SeqV::Line(v) => v.support_measure(),
            SeqV::Mesh(v) => v.support_measure(),
        }
    }

    /// `int |v|`.
    pub fn mass(&self) -> f64 {
        match &self.v {
            SeqV::Line(v) => v.abs_integral(),
            SeqV::Mesh(v) => v.abs_mass(),
        }
    }

    /// Measure of the domain.
    pub fn domain_measure(&self) -> f64 {
        match &self.u {
            SeqU::Line(u) => u.hi - u.lo,
            SeqU::Mesh(u) => u.grid().volume(),
        }
    }

    /// `int phi v` (vector).
    pub fn pair_v(&self, phi: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
        match &self.v {
            SeqV::Line(v) => line_pair(v, phi),
            SeqV::Mesh(v) => v.pair(phi),
        }
    }

    /// `int phi u` (vector).
    pub fn pair_u(&self, phi: &dyn Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
        match (&self.u, &self.v) {
            (SeqU::Line(u), _) => Ok(line_pair_u(u, phi)),
            (SeqU::Mesh(u), SeqV::Mesh(v)) => (0..u.base.dim)
                .map(|c| integrate_mesh(u, v, &|x, uu, _, _| phi(x) * uu[c]))
                .collect(),
            _ => Err(RelaxError::Representation(
                "u and v have different dimensions".into(),
            )),
        }
    }
}

/// Breakpoints and values of a Sobolev `u` on a mesh refining its slope.
fn line_nodes(u: &BV1D, extra: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let base = uniform_breaks(u.lo, u.hi, BASE_CELLS);
    let mut lists: Vec<&[f64]> = vec![&base, extra];
    if let Some(s) = &u.slope {
        lists.push(s.breaks());
    }
    let breaks = merge_breaks(&lists, 1e-14 * (u.hi - u.lo));
    let mut vals = Vec::with_capacity(breaks.len());
    let mut cur = u.anchor.clone();
    vals.push(cur.clone());
    for w in breaks.windows(2) {
        if let Some(s) = &u.slope {
            let sl = s.value_at(0.5 * (w[0] + w[1]));
            for (c, d) in cur.iter_mut().zip(sl) {
                *c += d * (w[1] - w[0]);
            }
        }
        vals.push(cur.clone());
    }
    (breaks, vals)
}

fn line_energy(u: &BV1D, v: &StepFn, d: &Densities) -> f64 {
    let (breaks, vals) = line_nodes(u, v.breaks());
    let (gx, gw) = gauss_legendre_unit(5);
    let m = u.dim;
    let mut total = 0.0;
    let mut p = vec![0.0; m];
    for (i, w) in breaks.windows(2).enumerate() {
        let (l, r) = (w[0], w[1]);
        let len = r - l;
        let mid = 0.5 * (l + r);
        let slope: Vec<f64> = (0..m)
            .map(|k| (vals[i + 1][k] - vals[i][k]) / len)
            .collect();
        let vv = v.value_at(mid);
        let f2v = (d.f2)(vv);
        let mut acc = 0.0;
        if f2v != 0.0 {
            for (t, wt) in gx.iter().zip(gw) {
                for k in 0..m {
                    p[k] = vals[i][k] + t * (vals[i + 1][k] - vals[i][k]);
                }
                acc += wt * (d.f1)(&p);
            }
        }
        total += len * (acc * f2v + (d.w)(&slope));
    }
    total
}

fn line_pair(v: &StepFn, phi: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
    let (gx, gw) = gauss_legendre_unit(5);
    let mut out = vec![0.0; v.dim()];
    for (l, r, val) in v.pieces() {
        let sub = ((r - l) / (v.hi() - v.lo()) * 64.0).ceil().max(1.0) as usize;
        let h = (r - l) / sub as f64;
        let mut acc = 0.0;
        for j in 0..sub {
            for (t, w) in gx.iter().zip(gw) {
                acc += w * phi(&[l + h * (j as f64 + t)]);
            }
        }
        for (o, x) in out.iter_mut().zip(val) {
            *o += acc * h * x;
        }
    }
    out
}

/// `int phi u` for a BV function (jumps and Cantor parts allowed).
pub fn line_pair_u(u: &BV1D, phi: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut extra: Vec<f64> = u.jumps.iter().map(|j| j.x).collect();
    extra.extend(u.cantor.iter().map(|n| n.x));
    let base = uniform_breaks(u.lo, u.hi, BASE_CELLS);
    let breaks = merge_breaks(
        &[
            &base,
            &extra,
            u.slope.as_ref().map_or(&[][..], |s| s.breaks()),
        ],
        0.0,
    );
    let (gx, gw) = gauss_legendre_unit(5);
    let mut out = vec![0.0; u.dim];
    for w in breaks.windows(2) {
        let (l, r) = (w[0], w[1]);
        for (t, wt) in gx.iter().zip(gw) {
            let x = l + t * (r - l);
            let val = u.value(x);
            let f = phi(&[x]) * wt * (r - l);
            for (o, y) in out.iter_mut().zip(&val) {
                *o += f * y;
            }
        }
    }
    out
}

/// The finer of two nested grids on the same box.
fn common_grid(a: &Grid, b: &Grid) -> Result<Grid> {
    if a.lo != b.lo || a.hi != b.hi {
        return Err(RelaxError::Representation(
            "u and v live on different boxes".into(),
        ));
    }
    let fine_a = a.cells.iter().zip(&b.cells).all(|(x, y)| x % y == 0);
    let fine_b = a.cells.iter().zip(&b.cells).all(|(x, y)| y % x == 0);
    if fine_a {
        Ok(a.clone())
    } else if fine_b {
        Ok(b.clone())
    } else {
        Err(RelaxError::Representation(
            "u and v grids are not nested".into(),
        ))
    }
}

/// Integrand `(x, u, grad u, v) -> density`.
pub type Quad4<'a> = dyn Fn(&[f64], &[f64], &[f64], &[f64]) -> f64 + 'a;

/// `int F(x, u_eps, grad u_eps, v) dx` for a modified field and a spiked
/// density.
///
/// The smooth part is integrated cellwise on the finer grid; each cut-off
/// disk adds the difference between the modified and the truncated field by
/// a log-radial rule, and each spike adds its ball term at the center.
pub fn integrate_mesh(u: &ModifiedField, v: &SpikedDensity, f: &Quad4<'_>) -> Result<f64> {
    let grid = common_grid(u.grid(), &v.grid)?;
    let n = grid.dim();
    let (gx, gw) = gauss_legendre_unit(3);
    let vol = grid.cell_volume();
    let mut total = 0.0;
    let mut p = vec![0.0; n];
    for cell in 0..grid.num_cells() {
        let idx = grid.cell_multi(cell);
        let centre = grid.cell_center(cell);
        let ucell = u.grid().locate(&centre);
        let vv = v.base_at(&centre);
        let mut acc = 0.0;
        for q in 0..gx.len().pow(n as u32) {
            let (mut r, mut w) = (q, 1.0);
            for a in 0..n {
                let j = r % gx.len();
                r /= gx.len();
                p[a] = grid.lo[a] + grid.h(a) * (idx[a] as f64 + gx[j]);
                w *= gw[j];
            }
            let (t, tg) = u.truncated_in(ucell, &p);
            acc += w * f(&p, &t, &tg, vv);
        }
        total += vol * acc;
    }
    for d in &u.disks {
        let mut acc = 0.0;
        disk_quadrature(n, d, &mut |x, w| {
            let cell = u.grid().locate(x);
            let (t, tg) = u.truncated_in(cell, x);
            let (m, mg) = u.eval(x);
            let vv = v.base_at(x);
            acc += w * (f(x, &m, &mg, vv) - f(x, &t, &tg, vv));
        });
        total += acc;
    }
    for s in &v.spikes {
        let (m, mg) = u.eval(&s.center);
        let b = v.base_at(&s.center);
        let with: Vec<f64> = b.iter().zip(&s.density).map(|(a, c)| a + c).collect();
        total += s.volume * (f(&s.center, &m, &mg, &with) - f(&s.center, &m, &mg, b));
    }
    Ok(total)
}

/// Distance from `x` to the nearest point of `others` (infinite if none).
pub(crate) fn nearest(x: &[f64], others: &[Vec<f64>]) -> f64 {
    others
        .iter()
        .map(|o| norm(&sub(x, o)))
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min)
}
