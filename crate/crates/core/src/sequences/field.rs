//! Fields used by the n-dimensional sequences: a truncated mesh field
//! pulled towards a fixed value on small disks, and a cell density with
//! narrow spikes on top.

use std::f64::consts::PI;

use crate::error::{RelaxError, Result};
use crate::mesh::{Grid, MeshField};
use crate::vecops::{gauss_legendre_unit, norm, sub};

/// `phi(y) = log(1 - log y)` for `0 < y <= 1`.
pub fn cutoff_phi(y: f64) -> f64 {
    (1.0 - y.ln()).ln()
}

/// `phi_s = min(1, max(0, s phi - 1))`: 1 for `y <= inner_ratio(s)`, 0 for
/// `y >= outer_ratio(s)`.
pub fn cutoff_phi_s(s: f64, y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    (s * cutoff_phi(y) - 1.0).clamp(0.0, 1.0)
}

/// Derivative of `phi_s` in `y` (zero off the transition band).
pub fn cutoff_phi_s_prime(s: f64, y: f64) -> f64 {
    if y <= inner_ratio(s) || y >= outer_ratio(s) {
        0.0
    } else {
        -s / (y * (1.0 - y.ln()))
    }
}

/// Largest `y` with `phi_s(y) = 1`.
pub fn inner_ratio(s: f64) -> f64 {
    (1.0 - (2.0 / s).exp()).exp()
}

/// Smallest `y` with `phi_s(y) = 0`.
pub fn outer_ratio(s: f64) -> f64 {
    (1.0 - (1.0 / s).exp()).exp()
}

/// Smallest dyadic `s` with `phi(ratio) >= 2 / s`, so that `phi_s = 1` on the
/// ball of relative radius `ratio < 1`.
pub fn dyadic_s(ratio: f64) -> f64 {
    let need = 2.0 / cutoff_phi(ratio);
    let mut s = 2f64.powi(need.log2().ceil() as i32);
    while s * cutoff_phi(ratio) < 2.0 {
        s *= 2.0;
    }
    s
}

/// Volume of the unit ball in dimension 2 or 3.
pub fn unit_ball_volume(n: usize) -> f64 {
    if n == 2 {
        PI
    } else {
        4.0 * PI / 3.0
    }
}

pub fn ball_radius(n: usize, volume: f64) -> f64 {
    (volume / unit_ball_volume(n)).powf(1.0 / n as f64)
}

/// A cut-off disk: `h = phi_s(|x - center| / rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Disk {
    pub center: Vec<f64>,
    pub rho: f64,
    pub s: f64,
}

impl Disk {
    /// `h` and its gradient at `x`.
    pub fn h(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let d = sub(x, &self.center);
        let r = norm(&d);
        let y = r / self.rho;
        let h = cutoff_phi_s(self.s, y);
        let dp = cutoff_phi_s_prime(self.s, y);
        let grad = if dp == 0.0 || r == 0.0 {
            vec![0.0; x.len()]
        } else {
            d.iter().map(|c| dp * c / (r * self.rho)).collect()
        };
        (h, grad)
    }
}

/// `u_eps = (1 - h) T(u) + h u_min`, where `T` clamps every component to
/// `[-cap, cap]` and `h` is the sum of the disk cut-offs (disks are
/// disjoint).
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedField {
    pub base: MeshField,
    pub cap: f64,
    pub u_min: Vec<f64>,
    pub disks: Vec<Disk>,
}

impl ModifiedField {
    /// The field itself, unmodified.
    pub fn plain(base: MeshField) -> Self {
        let m = base.dim;
        Self {
            base,
            cap: f64::INFINITY,
            u_min: vec![0.0; m],
            disks: Vec::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.base.grid
    }

    /// Truncated value and gradient in `cell`.
    pub fn truncated_in(&self, cell: usize, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (mut u, mut g) = self.base.value_and_gradient_in(cell, x);
        let n = self.base.grid.dim();
        for (k, c) in u.iter_mut().enumerate() {
            if c.abs() > self.cap {
                *c = c.signum() * self.cap;
                g[k * n..(k + 1) * n].iter_mut().for_each(|v| *v = 0.0);
            }
        }
        (u, g)
    }

    pub fn h(&self, x: &[f64]) -> (f64, Vec<f64>) {
        for d in &self.disks {
            if norm(&sub(x, &d.center)) < d.rho {
                return d.h(x);
            }
        }
        (0.0, vec![0.0; x.len()])
    }

    /// Value and gradient (`m x n`, row-major) of `u_eps` at `x`.
    pub fn eval(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let cell = self.base.grid.locate(x);
        let (t, tg) = self.truncated_in(cell, x);
        let (h, hg) = self.h(x);
        self.combine(&t, &tg, h, &hg)
    }

    fn combine(&self, t: &[f64], tg: &[f64], h: f64, hg: &[f64]) -> (Vec<f64>, Vec<f64>) {
        if h == 0.0 && hg.iter().all(|v| *v == 0.0) {
            return (t.to_vec(), tg.to_vec());
        }
        let n = hg.len();
        let u = t
            .iter()
            .zip(&self.u_min)
            .map(|(a, b)| (1.0 - h) * a + h * b)
            .collect();
        let mut g = vec![0.0; tg.len()];
        for k in 0..t.len() {
            for a in 0..n {
                g[k * n + a] = (1.0 - h) * tg[k * n + a] + (self.u_min[k] - t[k]) * hg[a];
            }
        }
        (u, g)
    }

    /// `int |grad h| dx`.
    pub fn grad_h_l1(&self) -> f64 {
        let n = self.base.grid.dim();
        self.disks
            .iter()
            .map(|d| {
                let mut acc = 0.0;
                disk_quadrature(n, d, &mut |x, w| acc += w * norm(&d.h(x).1));
                acc
            })
            .sum()
    }
}

/// Unit directions with weights summing to the sphere area.
fn sphere_rule(n: usize) -> Vec<(Vec<f64>, f64)> {
    if n == 2 {
        let k = 64;
        (0..k)
            .map(|i| {
                let a = 2.0 * PI * (i as f64 + 0.5) / k as f64;
                (vec![a.cos(), a.sin()], 2.0 * PI / k as f64)
            })
            .collect()
    } else {
        let (gx, gw) = gauss_legendre_unit(5);
        let k = 24;
        let mut out = Vec::new();
        for rep in 0..4 {
            for (x, w) in gx.iter().zip(gw) {
                // four panels in cos(theta)
                let c = -1.0 + 0.5 * (rep as f64 + x);
                let sn = (1.0 - c * c).max(0.0).sqrt();
                for i in 0..k {
                    let a = 2.0 * PI * (i as f64 + 0.5) / k as f64;
                    out.push((
                        vec![sn * a.cos(), sn * a.sin(), c],
                        0.5 * w * 2.0 * PI / k as f64,
                    ));
                }
            }
        }
        out
    }
}

/// Quadrature of a function over the part of the disk where `h > 0`,
/// using log-radial panels; radii below `e^-30` times the transition radius
/// are dropped (their volume is negligible).
pub(crate) fn disk_quadrature(n: usize, d: &Disk, f: &mut dyn FnMut(&[f64], f64)) {
    let (gx, gw) = gauss_legendre_unit(5);
    let dirs = sphere_rule(n);
    let outer = (outer_ratio(d.s) * d.rho).ln();
    let inner = (inner_ratio(d.s) * d.rho).ln();
    let low = outer - 30.0;
    let mut bands = Vec::new();
    if inner > low {
        bands.push((low, inner));
        bands.push((inner, outer));
    } else {
        bands.push((low, outer));
    }
    let mut x = vec![0.0; n];
    for (a, b) in bands {
        let panels = ((b - a).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            for (t, w) in gx.iter().zip(gw) {
                let lr = a + h * (p as f64 + t);
                let r = lr.exp();
                // dx = r^(n-1) dr dS, dr = r dt
                let radial = w * h * r.powi(n as i32);
                for (dir, dw) in &dirs {
                    for k in 0..n {
                        x[k] = d.center[k] + r * dir[k];
                    }
                    f(&x, radial * dw);
                }
            }
        }
    }
}

/// A constant vector density on a small ball of volume `volume`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spike {
    pub center: Vec<f64>,
    pub volume: f64,
    pub density: Vec<f64>,
}

impl Spike {
    pub fn mass(&self) -> Vec<f64> {
        self.density.iter().map(|d| d * self.volume).collect()
    }
}

/// Cell densities on a grid plus spikes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedDensity {
    pub grid: Grid,
    pub dim: usize,
    pub base: Vec<Vec<f64>>,
    pub spikes: Vec<Spike>,
}

impl SpikedDensity {
    pub fn new(grid: Grid, dim: usize, base: Vec<Vec<f64>>, spikes: Vec<Spike>) -> Result<Self> {
        if base.len() != grid.num_cells() || base.iter().any(|b| b.len() != dim) {
            return Err(RelaxError::Representation(
                "cell densities do not fit the grid".into(),
            ));
        }
        for s in &spikes {
            if s.density.len() != dim || !(s.volume > 0.0) || !grid.contains(&s.center) {
                return Err(RelaxError::Representation(format!(
                    "bad spike at {:?}",
                    s.center
                )));
            }
        }
        Ok(Self {
            grid,
            dim,
            base,
            spikes,
        })
    }

    pub fn zero(grid: Grid, dim: usize) -> Self {
        let base = vec![vec![0.0; dim]; grid.num_cells()];
        Self {
            grid,
            dim,
            base,
            spikes: Vec::new(),
        }
    }

    pub fn base_at(&self, x: &[f64]) -> &[f64] {
        &self.base[self.grid.locate(x)]
    }

    /// Spike whose ball contains `x`, if any.
    pub fn spike_at(&self, x: &[f64]) -> Option<&Spike> {
        let n = self.grid.dim();
        self.spikes
            .iter()
            .find(|s| norm(&sub(x, &s.center)) < ball_radius(n, s.volume))
    }

    pub fn value_at(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.base_at(x).to_vec();
        if let Some(s) = self.spike_at(x) {
            v.iter_mut().zip(&s.density).for_each(|(a, b)| *a += b);
        }
        v
    }

    pub fn total(&self) -> Vec<f64> {
        let vol = self.grid.cell_volume();
        let mut out = vec![0.0; self.dim];
        for b in &self.base {
            crate::vecops::axpy(&mut out, vol, b);
        }
        for s in &self.spikes {
            crate::vecops::add_assign(&mut out, &s.mass());
        }
        out
    }

    /// `int |v| dx`, spikes assumed disjoint and inside one cell each.
    pub fn abs_mass(&self) -> f64 {
        let vol = self.grid.cell_volume();
        let mut m: f64 = self.base.iter().map(|b| vol * norm(b)).sum();
        for s in &self.spikes {
            let b = self.base_at(&s.center);
            let with: Vec<f64> = b.iter().zip(&s.density).map(|(a, c)| a + c).collect();
            m += s.volume * (norm(&with) - norm(b));
        }
        m
    }

    /// `L({v != 0})`.
    pub fn support_measure(&self) -> f64 {
        let vol = self.grid.cell_volume();
        let mut m = self.base.iter().filter(|b| norm(b) > 0.0).count() as f64 * vol;
        for s in &self.spikes {
            if norm(self.base_at(&s.center)) == 0.0 {
                m += s.volume;
            }
        }
        m
    }

    /// `int phi v`, with the spikes paired at their centers.
    pub fn pair(&self, phi: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let vol = self.grid.cell_volume();
        let n = self.grid.dim();
        let (gx, gw) = gauss_legendre_unit(3);
        for (cell, b) in self.base.iter().enumerate() {
            if norm(b) == 0.0 {
                continue;
            }
            let idx = self.grid.cell_multi(cell);
            let mut acc = 0.0;
            for q in 0..gx.len().pow(n as u32) {
                let (mut r, mut w) = (q, 1.0);
                let mut p = Vec::with_capacity(n);
                for a in 0..n {
                    let j = r % gx.len();
                    r /= gx.len();
                    p.push(self.grid.lo[a] + self.grid.h(a) * (idx[a] as f64 + gx[j]));
                    w *= gw[j];
                }
                acc += w * phi(&p);
            }
            crate::vecops::axpy(&mut out, vol * acc, b);
        }
        for s in &self.spikes {
            crate::vecops::axpy(&mut out, phi(&s.center), &s.mass());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_levels() {
        let s = 0.5;
        assert_eq!(cutoff_phi_s(s, inner_ratio(s) * 0.999), 1.0);
        assert_eq!(cutoff_phi_s(s, outer_ratio(s) * 1.001), 0.0);
        assert!((cutoff_phi(1.0)).abs() < 1e-15);
    }

    #[test]
    fn dyadic_s_covers_the_ball() {
        for ratio in [0.5, 0.1, 1e-5, 1e-40, 1e-300] {
            let s = dyadic_s(ratio);
            assert!(s * cutoff_phi(ratio) >= 2.0);
            assert!(0.5 * s * cutoff_phi(ratio) < 2.0);
            assert_eq!(cutoff_phi_s(s, ratio), 1.0);
        }
    }

    #[test]
    fn gradient_l1_matches_radial_formula() {
        // int |grad h| = 2 pi rho int_{y_in}^{y_out} s / (1 - ln y) dy in 2D
        let d = Disk {
            center: vec![0.5, 0.5],
            rho: 0.25,
            s: 2.0,
        };
        let mut acc = 0.0;
        disk_quadrature(2, &d, &mut |x, w| acc += w * norm(&d.h(x).1));
        let (a, b) = (inner_ratio(2.0), outer_ratio(2.0));
        let m = 20000;
        let oracle: f64 = (0..m)
            .map(|i| {
                let y = a + (b - a) * (i as f64 + 0.5) / m as f64;
                2.0 / (1.0 - y.ln()) * (b - a) / m as f64
            })
            .sum::<f64>()
            * 2.0
            * PI
            * 0.25;
        assert!((acc - oracle).abs() < 1e-6 * oracle, "{acc} vs {oracle}");
    }

    #[test]
    fn disk_quadrature_measures_the_ball() {
        let d = Disk {
            center: vec![0.0, 0.0, 0.0],
            rho: 1.0,
            s: 4.0,
        };
        let mut vol = 0.0;
        disk_quadrature(3, &d, &mut |_, w| vol += w);
        let r = outer_ratio(4.0);
        // five-point panels of unit width in ln r: relative error near 1e-8
        let exact = 4.0 / 3.0 * PI * r.powi(3);
        assert!((vol - exact).abs() < 1e-7 * exact, "{vol} vs {exact}");
    }
}
