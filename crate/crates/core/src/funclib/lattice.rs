//! Uniform tensor lattices on boxes of R^d with piecewise-linear interpolation.
//!
//! In d = 2 every lattice cell is split along its (0,0)-(1,1) diagonal. Outside
//! the box the interpolant is continued affinely with the gradient of the
//! boundary cell that contains the clamped point.

use crate::error::{RelaxError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Nodes per axis (at least 2).
    pub n: Vec<usize>,
}

impl Lattice {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != n.len() || lo.is_empty() {
            return Err(RelaxError::Representation(
                "lattice bounds and node counts disagree in dimension".into(),
            ));
        }
        for i in 0..lo.len() {
            if !(lo[i] < hi[i]) || n[i] < 2 {
                return Err(RelaxError::Representation(format!(
                    "degenerate lattice axis {i}: [{}, {}] with {} nodes",
                    lo[i], hi[i], n[i]
                )));
            }
        }
        Ok(Self { lo, hi, n })
    }

    /// Symmetric box [-r, r]^d with `nodes` nodes per axis.
    pub fn symmetric(d: usize, r: f64, nodes: usize) -> Result<Self> {
        Self::new(vec![-r; d], vec![r; d], vec![nodes; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.n[axis] - 1) as f64
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        let last = self.n[axis] - 1;
        if i == last {
            self.hi[axis]
        } else {
            self.lo[axis] + (self.hi[axis] - self.lo[axis]) * i as f64 / last as f64
        }
    }

    /// Multi-index of a flat index; axis 0 varies fastest.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim());
        for &k in &self.n {
            out.push(flat % k);
            flat /= k;
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for (a, &i) in idx.iter().enumerate() {
            flat += i * stride;
            stride *= self.n[a];
        }
        flat
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.coord(a, i))
            .collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(a, &v)| v >= self.lo[a] && v <= self.hi[a])
    }

    /// Interpolated value of nodal data `values` at `x` (affine outside).
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        self.value_and_gradient(values, x).0
    }

    /// Value and gradient of the piecewise-linear interpolant at `x`.
    pub fn value_and_gradient(&self, values: &[f64], x: &[f64]) -> (f64, Vec<f64>) {
        match self.dim() {
            1 => {
                let (v, g) = self.eval_1d(values, x[0]);
                (v, vec![g])
            }
            2 => self.eval_2d(values, x),
            _ => self.eval_multilinear(values, x),
        }
    }

    /// Cell index and local coordinate of the clamped point along one axis.
    fn locate(&self, axis: usize, x: f64) -> (usize, f64, f64) {
        let xc = x.clamp(self.lo[axis], self.hi[axis]);
        let h = self.step(axis);
        let last = self.n[axis] - 2;
        let i = (((xc - self.lo[axis]) / h).floor() as isize).clamp(0, last as isize) as usize;
        let left = self.coord(axis, i);
        let right = self.coord(axis, i + 1);
        let t = ((xc - left) / (right - left)).clamp(0.0, 1.0);
        (i, t, xc)
    }

    fn eval_1d(&self, values: &[f64], x: f64) -> (f64, f64) {
        let (i, t, xc) = self.locate(0, x);
        let h = self.coord(0, i + 1) - self.coord(0, i);
        let g = (values[i + 1] - values[i]) / h;
        let v = values[i] + t * (values[i + 1] - values[i]);
        (v + g * (x - xc), g)
    }

    fn eval_2d(&self, values: &[f64], x: &[f64]) -> (f64, Vec<f64>) {
        let (i, s, xc) = self.locate(0, x[0]);
        let (j, t, yc) = self.locate(1, x[1]);
        let hx = self.coord(0, i + 1) - self.coord(0, i);
        let hy = self.coord(1, j + 1) - self.coord(1, j);
        let f = |a: usize, b: usize| values[self.flat_index(&[i + a, j + b])];
        let (f00, f10, f01, f11) = (f(0, 0), f(1, 0), f(0, 1), f(1, 1));
        let (v, gs, gt) = if s >= t {
            (
                f00 + s * (f10 - f00) + t * (f11 - f10),
                f10 - f00,
                f11 - f10,
            )
        } else {
            (
                f00 + t * (f01 - f00) + s * (f11 - f01),
                f11 - f01,
                f01 - f00,
            )
        };
        let g = vec![gs / hx, gt / hy];
        let v = v + g[0] * (x[0] - xc) + g[1] * (x[1] - yc);
        (v, g)
    }

    fn eval_multilinear(&self, values: &[f64], x: &[f64]) -> (f64, Vec<f64>) {
        let d = self.dim();
        let mut base = Vec::with_capacity(d);
        let mut ts = Vec::with_capacity(d);
        let mut xc = Vec::with_capacity(d);
        for a in 0..d {
            let (i, t, c) = self.locate(a, x[a]);
            base.push(i);
            ts.push(t);
            xc.push(c);
        }
        let mut v = 0.0;
        let mut g = vec![0.0; d];
        for corner in 0..(1usize << d) {
            let mut idx = base.clone();
            let mut w = 1.0;
            for a in 0..d {
                if corner >> a & 1 == 1 {
                    idx[a] += 1;
                    w *= ts[a];
                } else {
                    w *= 1.0 - ts[a];
                }
            }
            let fv = values[self.flat_index(&idx)];
            v += w * fv;
            for (a, ga) in g.iter_mut().enumerate() {
                let mut wa = 1.0 / self.step(a);
                for b in 0..d {
                    if b == a {
                        continue;
                    }
                    wa *= if corner >> b & 1 == 1 {
                        ts[b]
                    } else {
                        1.0 - ts[b]
                    };
                }
                if corner >> a & 1 == 1 {
                    *ga += wa * fv;
                } else {
                    *ga -= wa * fv;
                }
            }
        }
        for a in 0..d {
            v += g[a] * (x[a] - xc[a]);
        }
        (v, g)
    }
}
