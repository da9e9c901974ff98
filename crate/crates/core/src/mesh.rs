//! Rectangular meshes in dimension n >= 2 with nodal fields and cell measures.

use crate::error::{RelaxError, Result};
use crate::vecops::{is_zero, norm};

/// Uniform rectangular mesh of `cells[a]` cells along each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        let n = lo.len();
        if hi.len() != n || cells.len() != n || !(2..=3).contains(&n) {
            return Err(RelaxError::UnsupportedDimension {
                dim: n,
                reason: "meshes are supported for n = 2 and n = 3".into(),
            });
        }
        for a in 0..n {
            if !(lo[a] < hi[a]) || cells[a] == 0 {
                return Err(RelaxError::Representation(format!(
                    "degenerate mesh axis {a}"
                )));
            }
        }
        Ok(Self { lo, hi, cells })
    }

    pub fn unit_square(cells: usize) -> Self {
        Self {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
            cells: vec![cells, cells],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn h(&self, a: usize) -> f64 {
        (self.hi[a] - self.lo[a]) / self.cells[a] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.h(a)).product()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn num_nodes(&self) -> usize {
        self.cells.iter().map(|c| c + 1).product()
    }

    pub fn cell_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for (a, &i) in idx.iter().enumerate() {
            flat += i * stride;
            stride *= self.cells[a];
        }
        flat
    }

    pub fn cell_multi(&self, mut flat: usize) -> Vec<usize> {
        self.cells
            .iter()
            .map(|&c| {
                let i = flat % c;
                flat /= c;
                i
            })
            .collect()
    }

    pub fn node_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for (a, &i) in idx.iter().enumerate() {
            flat += i * stride;
            stride *= self.cells[a] + 1;
        }
        flat
    }

    pub fn node_multi(&self, mut flat: usize) -> Vec<usize> {
        self.cells
            .iter()
            .map(|&c| {
                let i = flat % (c + 1);
                flat /= c + 1;
                i
            })
            .collect()
    }

    pub fn node_point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(a, &i)| {
                if i == self.cells[a] {
                    self.hi[a]
                } else {
                    self.lo[a] + self.h(a) * i as f64
                }
            })
            .collect()
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        self.cell_multi(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.lo[a] + self.h(a) * (i as f64 + 0.5))
            .collect()
    }

    /// Cell containing `x` (clamped; points on interior faces go to the
    /// upper cell).
    pub fn locate(&self, x: &[f64]) -> usize {
        let idx: Vec<usize> = (0..self.dim())
            .map(|a| {
                let t = ((x[a] - self.lo[a]) / self.h(a)).floor();
                (t.max(0.0) as usize).min(self.cells[a] - 1)
            })
            .collect();
        self.cell_index(&idx)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|a| x[a] >= self.lo[a] && x[a] <= self.hi[a])
    }

    /// Distance from `x` to the boundary of the box.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|a| (x[a] - self.lo[a]).min(self.hi[a] - x[a]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A jump of `u` across the face between cell `cell` and its upper
/// neighbour along `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceJump {
    pub cell: Vec<usize>,
    pub axis: usize,
    /// `u+ - u-` with the normal pointing along `+axis`.
    pub jump: Vec<f64>,
}

/// Continuous multilinear field given by nodal values, with optional jumps
/// across interior faces.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshField {
    pub grid: Grid,
    pub dim: usize,
    pub nodal: Vec<Vec<f64>>,
    pub face_jumps: Vec<FaceJump>,
}

impl MeshField {
    pub fn new(grid: Grid, nodal: Vec<Vec<f64>>, face_jumps: Vec<FaceJump>) -> Result<Self> {
        if nodal.len() != grid.num_nodes() || nodal.is_empty() {
            return Err(RelaxError::Representation(format!(
                "expected {} nodal values, got {}",
                grid.num_nodes(),
                nodal.len()
            )));
        }
        let dim = nodal[0].len();
        if dim == 0
            || nodal
                .iter()
                .any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite()))
        {
            return Err(RelaxError::Representation(
                "nodal values must be finite vectors".into(),
            ));
        }
        for f in &face_jumps {
            let ok = f.axis < grid.dim()
                && f.cell.len() == grid.dim()
                && f.cell[f.axis] + 1 < grid.cells[f.axis]
                && f.cell.iter().zip(&grid.cells).all(|(i, c)| i < c)
                && f.jump.len() == dim;
            if !ok {
                return Err(RelaxError::Representation(format!("bad face jump {f:?}")));
            }
        }
        Ok(Self {
            grid,
            dim,
            nodal,
            face_jumps,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let nodal = (0..grid.num_nodes())
            .map(|k| f(&grid.node_point(&grid.node_multi(k))))
            .collect();
        Self::new(grid, nodal, Vec::new())
    }

    pub fn constant(grid: Grid, value: Vec<f64>) -> Result<Self> {
        Self::from_fn(grid, |_| value.clone())
    }

    fn corner_values(&self, cell: &[usize]) -> Vec<&[f64]> {
        let n = self.grid.dim();
        (0..(1usize << n))
            .map(|c| {
                let idx: Vec<usize> = (0..n).map(|a| cell[a] + (c >> a & 1)).collect();
                self.nodal[self.grid.node_index(&idx)].as_slice()
            })
            .collect()
    }

    /// Value and gradient (`m x n`, row-major) of the multilinear
    /// interpolant at `x` in the cell `cell`.
    pub fn value_and_gradient_in(&self, cell: usize, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.dim();
        let idx = self.grid.cell_multi(cell);
        let t: Vec<f64> = (0..n)
            .map(|a| {
                let base = self.grid.lo[a] + self.grid.h(a) * idx[a] as f64;
                ((x[a] - base) / self.grid.h(a)).clamp(0.0, 1.0)
            })
            .collect();
        let corners = self.corner_values(&idx);
        let mut val = vec![0.0; self.dim];
        let mut grad = vec![0.0; self.dim * n];
        for (c, fv) in corners.iter().enumerate() {
            let mut w = 1.0;
            for a in 0..n {
                w *= if c >> a & 1 == 1 { t[a] } else { 1.0 - t[a] };
            }
            for k in 0..self.dim {
                val[k] += w * fv[k];
            }
            for a in 0..n {
                let mut wa = 1.0 / self.grid.h(a);
                for b in 0..n {
                    if b != a {
                        wa *= if c >> b & 1 == 1 { t[b] } else { 1.0 - t[b] };
                    }
                }
                let s = if c >> a & 1 == 1 { 1.0 } else { -1.0 };
                for k in 0..self.dim {
                    grad[k * n + a] += s * wa * fv[k];
                }
            }
        }
        (val, grad)
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.value_and_gradient_in(self.grid.locate(x), x)
    }

    pub fn cell_center_value(&self, cell: usize) -> Vec<f64> {
        let c = self.grid.cell_center(cell);
        self.value_and_gradient_in(cell, &c).0
    }

    pub fn integral(&self) -> Vec<f64> {
        let vol = self.grid.cell_volume();
        let mut out = vec![0.0; self.dim];
        for cell in 0..self.grid.num_cells() {
            // multilinear: the cell mean is the mean of the corners
            let corners = self.corner_values(&self.grid.cell_multi(cell));
            for c in &corners {
                for k in 0..self.dim {
                    out[k] += vol * c[k] / corners.len() as f64;
                }
            }
        }
        out
    }

    /// Area of the face carrying `f` and its center.
    pub fn face_geometry(&self, f: &FaceJump) -> (f64, Vec<f64>) {
        let g = &self.grid;
        let area: f64 = (0..g.dim())
            .filter(|&a| a != f.axis)
            .map(|a| g.h(a))
            .product();
        let center = (0..g.dim())
            .map(|a| {
                if a == f.axis {
                    g.lo[a] + g.h(a) * (f.cell[a] + 1) as f64
                } else {
                    g.lo[a] + g.h(a) * (f.cell[a] as f64 + 0.5)
                }
            })
            .collect();
        (area, center)
    }
}

/// A point mass in n dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    pub x: Vec<f64>,
    pub weight: Vec<f64>,
}

/// A node of the quadrature of a singular diffuse measure in n dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PointNode {
    pub x: Vec<f64>,
    pub mass: f64,
    pub direction: Vec<f64>,
}

/// A measure on the closed box: cell densities, atoms and a singular
/// quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureND {
    pub grid: Grid,
    pub dim: usize,
    pub ac: Option<Vec<Vec<f64>>>,
    pub atoms: Vec<PointMass>,
    pub singular: Vec<PointNode>,
}

impl MeasureND {
    pub fn new(
        grid: Grid,
        dim: usize,
        ac: Option<Vec<Vec<f64>>>,
        atoms: Vec<PointMass>,
        singular: Vec<PointNode>,
    ) -> Result<Self> {
        if let Some(d) = &ac {
            if d.len() != grid.num_cells() || d.iter().any(|v| v.len() != dim) {
                return Err(RelaxError::Representation(
                    "cell densities do not fit the mesh".into(),
                ));
            }
        }
        for a in &atoms {
            if !grid.contains(&a.x) || a.weight.len() != dim || is_zero(&a.weight) {
                return Err(RelaxError::Representation(format!("bad atom at {:?}", a.x)));
            }
        }
        for s in &singular {
            if !grid.contains(&s.x) || s.direction.len() != dim || !(s.mass >= 0.0) {
                return Err(RelaxError::Representation(format!(
                    "bad singular node at {:?}",
                    s.x
                )));
            }
        }
        Ok(Self {
            grid,
            dim,
            ac,
            atoms,
            singular,
        })
    }

    pub fn dirac(grid: Grid, x: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        let dim = weight.len();
        Self::new(grid, dim, None, vec![PointMass { x, weight }], Vec::new())
    }

    pub fn uniform(grid: Grid, density: Vec<f64>) -> Result<Self> {
        let dim = density.len();
        let cells = vec![density; grid.num_cells()];
        Self::new(grid, dim, Some(cells), Vec::new(), Vec::new())
    }

    pub fn total(&self) -> Vec<f64> {
        let vol = self.grid.cell_volume();
        let mut out = vec![0.0; self.dim];
        if let Some(d) = &self.ac {
            for v in d {
                crate::vecops::axpy(&mut out, vol, v);
            }
        }
        for a in &self.atoms {
            crate::vecops::add_assign(&mut out, &a.weight);
        }
        for s in &self.singular {
            crate::vecops::axpy(&mut out, s.mass, &s.direction);
        }
        out
    }

    pub fn total_variation(&self) -> f64 {
        let vol = self.grid.cell_volume();
        self.ac
            .as_ref()
            .map_or(0.0, |d| d.iter().map(|v| vol * norm(v)).sum())
            + self.atoms.iter().map(|a| norm(&a.weight)).sum::<f64>()
            + self.singular.iter().map(|s| s.mass).sum::<f64>()
    }

    pub fn pair(&self, phi: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let vol = self.grid.cell_volume();
        let mut out = vec![0.0; self.dim];
        if let Some(d) = &self.ac {
            let (xs, ws) = crate::vecops::gauss_legendre_unit(3);
            let n = self.grid.dim();
            for (cell, v) in d.iter().enumerate() {
                let idx = self.grid.cell_multi(cell);
                let mut acc = 0.0;
                let total = xs.len().pow(n as u32);
                for q in 0..total {
                    let mut p = Vec::with_capacity(n);
                    let mut w = 1.0;
                    let mut k = q;
                    for a in 0..n {
                        let j = k % xs.len();
                        k /= xs.len();
                        p.push(self.grid.lo[a] + self.grid.h(a) * (idx[a] as f64 + xs[j]));
                        w *= ws[j];
                    }
                    acc += w * phi(&p);
                }
                crate::vecops::axpy(&mut out, vol * acc, v);
            }
        }
        for a in &self.atoms {
            crate::vecops::axpy(&mut out, phi(&a.x), &a.weight);
        }
        for s in &self.singular {
            crate::vecops::axpy(&mut out, s.mass * phi(&s.x), &s.direction);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_affine_field_is_exact() {
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![4, 3]).unwrap();
        let u = MeshField::from_fn(g, |p| vec![1.0 + 2.0 * p[0] - p[1]]).unwrap();
        let (v, grad) = u.value_and_gradient(&[0.3, 1.1]);
        assert!((v[0] - (1.0 + 0.6 - 1.1)).abs() < 1e-14);
        assert!((grad[0] - 2.0).abs() < 1e-12 && (grad[1] + 1.0).abs() < 1e-12);
        assert!((u.integral()[0] - (2.0 + 2.0 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn index_round_trips() {
        let g = Grid::new(vec![0.0; 3], vec![1.0; 3], vec![2, 3, 4]).unwrap();
        for k in 0..g.num_cells() {
            assert_eq!(g.cell_index(&g.cell_multi(k)), k);
        }
        for k in 0..g.num_nodes() {
            assert_eq!(g.node_index(&g.node_multi(k)), k);
        }
    }

    #[test]
    fn one_dimensional_mesh_is_rejected() {
        assert!(Grid::new(vec![0.0], vec![1.0], vec![4]).is_err());
    }
}
