//! Piecewise-constant vector-valued functions on an interval.

use crate::error::{RelaxError, Result};

/// Values `values[i]` on `[breaks[i], breaks[i+1])`, each in R^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn {
    breaks: Vec<f64>,
    values: Vec<Vec<f64>>,
    dim: usize,
}

impl StepFn {
    pub fn new(breaks: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(RelaxError::Representation(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                values.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(RelaxError::Representation(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        let dim = values[0].len();
        if dim == 0
            || values
                .iter()
                .any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite()))
        {
            return Err(RelaxError::Representation(
                "piece values must be finite and of one dimension".into(),
            ));
        }
        Ok(Self {
            breaks,
            values,
            dim,
        })
    }

    /// Uniform mesh of `values.len()` cells on `[lo, hi]`; the cell count must
    /// be a power of two.
    pub fn uniform(lo: f64, hi: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        if !n.is_power_of_two() {
            return Err(RelaxError::Representation(format!(
                "uniform mesh needs a power-of-two cell count, got {n}"
            )));
        }
        Self::new(uniform_breaks(lo, hi, n), values)
    }

    /// Uniform mesh whose cell values are `f` at cell midpoints.
    pub fn uniform_from_fn(
        lo: f64,
        hi: f64,
        cells: usize,
        f: impl Fn(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let breaks = uniform_breaks(lo, hi, cells);
        let values = breaks.windows(2).map(|w| f(0.5 * (w[0] + w[1]))).collect();
        if !cells.is_power_of_two() {
            return Err(RelaxError::Representation(format!(
                "uniform mesh needs a power-of-two cell count, got {cells}"
            )));
        }
        Self::new(breaks, values)
    }

    pub fn constant(lo: f64, hi: f64, value: Vec<f64>) -> Result<Self> {
        Self::new(vec![lo, hi], vec![value])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self) -> f64 {
        self.breaks[0]
    }

    pub fn hi(&self) -> f64 {
        self.breaks[self.breaks.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// `(a, b, value)` for each piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, &[f64])> + '_ {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (w[0], w[1], v.as_slice()))
    }

    /// Index of the piece containing `x` (right-continuous, clamped).
    pub fn piece_index(&self, x: f64) -> usize {
        let k = self.breaks.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(self.values.len() - 1)
    }

    pub fn value_at(&self, x: f64) -> &[f64] {
        &self.values[self.piece_index(x)]
    }

    /// Integral over `[a, b]` intersected with the domain.
    pub fn integral_over(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        if !(a < b) {
            return out;
        }
        let start = self.piece_index(a);
        for i in start..self.values.len() {
            let (l, r) = (self.breaks[i], self.breaks[i + 1]);
            if l >= b {
                break;
            }
            let len = r.min(b) - l.max(a);
            if len > 0.0 {
                for (o, v) in out.iter_mut().zip(&self.values[i]) {
                    *o += len * v;
                }
            }
        }
        out
    }

    pub fn integral(&self) -> Vec<f64> {
        self.integral_over(self.lo(), self.hi())
    }

    /// Integral of the Euclidean norm.
    pub fn abs_integral(&self) -> f64 {
        self.pieces()
            .map(|(a, b, v)| (b - a) * crate::vecops::norm(v))
            .sum()
    }

    /// Support measure `L({x : value(x) != 0})`.
    pub fn support_measure(&self) -> f64 {
        self.pieces()
            .filter(|(_, _, v)| !crate::vecops::is_zero(v))
            .map(|(a, b, _)| b - a)
            .sum()
    }

    pub fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        Self::new(
            self.breaks.clone(),
            self.values.iter().map(|v| f(v)).collect(),
        )
    }

    /// Restriction to `[a, b]`, which must overlap the domain.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        let a = a.max(self.lo());
        let b = b.min(self.hi());
        let mut breaks = vec![a];
        let mut values = Vec::new();
        for (l, r, v) in self.pieces() {
            if r <= a || l >= b {
                continue;
            }
            let e = r.min(b);
            breaks.push(e);
            values.push(v.to_vec());
        }
        Self::new(breaks, values)
    }

    /// Pointwise sum on the common refinement; both must share the domain.
    pub fn add(&self, other: &StepFn) -> Result<Self> {
        let tol = 1e-12 * (1.0 + self.lo().abs().max(self.hi().abs()));
        if (self.lo() - other.lo()).abs() > tol
            || (self.hi() - other.hi()).abs() > tol
            || self.dim != other.dim
        {
            return Err(RelaxError::Representation(
                "step functions live on different domains".into(),
            ));
        }
        let breaks = merge_breaks(
            &[&self.breaks, &other.breaks[1..other.breaks.len() - 1]],
            0.0,
        );
        let values = breaks
            .windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                self.value_at(m)
                    .iter()
                    .zip(other.value_at(m))
                    .map(|(a, b)| a + b)
                    .collect()
            })
            .collect();
        Self::new(breaks, values)
    }

    /// Concatenation of step functions on adjacent intervals.
    pub fn concat(parts: &[StepFn]) -> Result<Self> {
        let mut breaks = Vec::new();
        let mut values = Vec::new();
        for (k, p) in parts.iter().enumerate() {
            if k == 0 {
                breaks.push(p.lo());
            } else if (p.lo() - breaks[breaks.len() - 1]).abs() > 1e-12 * (1.0 + p.lo().abs()) {
                return Err(RelaxError::Representation("pieces are not adjacent".into()));
            }
            breaks.extend_from_slice(&p.breaks[1..]);
            values.extend(p.values.iter().cloned());
        }
        Self::new(breaks, values)
    }
}

/// `n + 1` equally spaced breakpoints with exact endpoints.
pub fn uniform_breaks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / n as f64
            }
        })
        .collect()
}

/// Sorted union of breakpoint lists, merging values closer than `tol`.
pub fn merge_breaks(lists: &[&[f64]], tol: f64) -> Vec<f64> {
    let mut all: Vec<f64> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        if out.last().is_none_or(|&l| x - l > tol) {
            out.push(x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_over_partial_pieces() {
        let s = StepFn::new(vec![0.0, 0.5, 1.0], vec![vec![2.0], vec![-4.0]]).unwrap();
        assert_eq!(s.integral_over(0.25, 0.75), vec![0.5 - 1.0]);
        assert_eq!(s.integral(), vec![1.0 - 2.0]);
        assert_eq!(s.abs_integral(), 3.0);
    }

    #[test]
    fn rejects_non_power_of_two_uniform_mesh() {
        assert!(StepFn::uniform(0.0, 1.0, vec![vec![1.0]; 3]).is_err());
    }

    #[test]
    fn restrict_and_concat_round_trip() {
        let s =
            StepFn::uniform(0.0, 1.0, vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]]).unwrap();
        let a = s.restrict(0.0, 0.6).unwrap();
        let b = s.restrict(0.6, 1.0).unwrap();
        let c = StepFn::concat(&[a, b]).unwrap();
        assert_eq!(c.integral(), s.integral());
    }
}
