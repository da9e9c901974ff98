//! Functions of bounded variation on an interval, `u: (lo, hi) -> R^m`.
//!
//! `u` is reconstructed from an anchor value `u(lo+)`, an absolutely
//! continuous slope, a list of jumps and a quadrature of a Cantor part.
//! Each jump stores both one-sided traces and they must agree with the
//! reconstruction.

use crate::error::{RelaxError, Result};
use crate::measure1d::{Atom, Measure1D, SingularNode};
use crate::step::StepFn;
use crate::vecops::{add_assign, axpy, max_abs_diff, norm, sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub x: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl Jump {
    pub fn height(&self) -> Vec<f64> {
        sub(&self.right, &self.left)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BV1D {
    pub lo: f64,
    pub hi: f64,
    pub dim: usize,
    pub anchor: Vec<f64>,
    pub slope: Option<StepFn>,
    pub jumps: Vec<Jump>,
    pub cantor: Vec<SingularNode>,
}

impl BV1D {
    pub fn new(
        lo: f64,
        hi: f64,
        anchor: Vec<f64>,
        slope: Option<StepFn>,
        mut jumps: Vec<Jump>,
        mut cantor: Vec<SingularNode>,
    ) -> Result<Self> {
        let dim = anchor.len();
        if !(lo < hi) || dim == 0 {
            return Err(RelaxError::Representation(format!(
                "bad interval [{lo}, {hi}] or dimension {dim}"
            )));
        }
        if let Some(s) = &slope {
            let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
            if s.dim() != dim || (s.lo() - lo).abs() > tol || (s.hi() - hi).abs() > tol {
                return Err(RelaxError::Representation(
                    "slope must cover the interval and match the dimension".into(),
                ));
            }
        }
        jumps.sort_by(|a, b| a.x.total_cmp(&b.x));
        cantor.sort_by(|a, b| a.x.total_cmp(&b.x));
        for j in &jumps {
            if !(j.x > lo && j.x < hi) {
                return Err(RelaxError::Representation(format!(
                    "jump at {} is not interior to ({lo}, {hi})",
                    j.x
                )));
            }
            if j.left.len() != dim || j.right.len() != dim {
                return Err(RelaxError::Representation(format!(
                    "jump at {} has wrong dimension",
                    j.x
                )));
            }
        }
        if jumps.windows(2).any(|w| w[0].x == w[1].x) {
            return Err(RelaxError::Representation("repeated jump location".into()));
        }
        for n in &cantor {
            if !(n.x > lo && n.x < hi) || !(n.mass >= 0.0) || n.direction.len() != dim {
                return Err(RelaxError::Representation(format!(
                    "bad Cantor node at {}",
                    n.x
                )));
            }
            if jumps.iter().any(|j| j.x == n.x) {
                return Err(RelaxError::Representation(format!(
                    "Cantor node at {} coincides with a jump",
                    n.x
                )));
            }
        }
        let u = Self {
            lo,
            hi,
            dim,
            anchor,
            slope,
            jumps,
            cantor,
        };
        for j in &u.jumps {
            let left = u.reconstruct(j.x, Side::Left);
            let scale = 1.0 + norm(&left) + norm(&j.left);
            if max_abs_diff(&left, &j.left) > 1e-9 * scale {
                return Err(RelaxError::Representation(format!(
                    "left trace at {} is {:?} but the reconstruction gives {:?}",
                    j.x, j.left, left
                )));
            }
        }
        Ok(u)
    }

    /// Builds `u` from jump heights, filling in the traces.
    pub fn from_increments(
        lo: f64,
        hi: f64,
        anchor: Vec<f64>,
        slope: Option<StepFn>,
        increments: Vec<(f64, Vec<f64>)>,
        cantor: Vec<SingularNode>,
    ) -> Result<Self> {
        let dim = anchor.len();
        let mut provisional = Self::new(
            lo,
            hi,
            anchor.clone(),
            slope.clone(),
            Vec::new(),
            cantor.clone(),
        )?;
        let mut incs = increments;
        incs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut jumps = Vec::with_capacity(incs.len());
        for (x, h) in incs {
            if h.len() != dim {
                return Err(RelaxError::Representation(format!(
                    "jump at {x} has wrong dimension"
                )));
            }
            let left = provisional.reconstruct(x, Side::Left);
            let mut right = left.clone();
            add_assign(&mut right, &h);
            jumps.push(Jump { x, left, right });
            provisional.jumps = jumps.clone();
        }
        Self::new(lo, hi, anchor, slope, jumps, cantor)
    }

    pub fn constant(lo: f64, hi: f64, value: Vec<f64>) -> Result<Self> {
        Self::new(lo, hi, value, None, Vec::new(), Vec::new())
    }

    /// `u(x) = a + s (x - lo)`.
    pub fn affine(lo: f64, hi: f64, a: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        let slope = StepFn::constant(lo, hi, s)?;
        Self::new(lo, hi, a, Some(slope), Vec::new(), Vec::new())
    }

    fn reconstruct(&self, x: f64, side: Side) -> Vec<f64> {
        let mut out = self.anchor.clone();
        if let Some(s) = &self.slope {
            add_assign(&mut out, &s.integral_over(self.lo, x));
        }
        let counts = |p: f64| match side {
            Side::Left => p < x,
            Side::Right => p <= x,
        };
        for j in self.jumps.iter().filter(|j| counts(j.x)) {
            add_assign(&mut out, &j.height());
        }
        for n in self.cantor.iter().filter(|n| counts(n.x)) {
            axpy(&mut out, n.mass, &n.direction);
        }
        out
    }

    /// One-sided limit at `x`. The left trace needs `x > lo`, the right trace
    /// needs `x < hi`.
    pub fn trace(&self, x: f64, side: Side) -> Result<Vec<f64>> {
        let ok = match side {
            Side::Left => x > self.lo && x <= self.hi,
            Side::Right => x >= self.lo && x < self.hi,
        };
        if !ok {
            return Err(RelaxError::Domain {
                x,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(self.reconstruct(x, side))
    }

    /// Pointwise value; at a jump or Cantor node this is the mean of the
    /// traces, at the right endpoint the left trace.
    pub fn value(&self, x: f64) -> Vec<f64> {
        if x >= self.hi {
            return self.reconstruct(self.hi, Side::Left);
        }
        let r = self.reconstruct(x, Side::Right);
        if self.jumps.iter().any(|j| j.x == x) || self.cantor.iter().any(|n| n.x == x) {
            let l = self.reconstruct(x, Side::Left);
            return r.iter().zip(&l).map(|(a, b)| 0.5 * (a + b)).collect();
        }
        r
    }

    /// `Du` as a measure on `[lo, hi]`.
    pub fn derivative(&self) -> Measure1D {
        let atoms = self
            .jumps
            .iter()
            .filter(|j| norm(&j.height()) > 0.0)
            .map(|j| Atom {
                x: j.x,
                weight: j.height(),
            })
            .collect();
        let singular = self
            .cantor
            .iter()
            .filter(|n| n.mass > 0.0)
            .map(|n| {
                let r = norm(&n.direction);
                SingularNode {
                    x: n.x,
                    mass: n.mass * r,
                    direction: n.direction.iter().map(|d| d / r).collect(),
                }
            })
            .collect();
        Measure1D {
            lo: self.lo,
            hi: self.hi,
            dim: self.dim,
            atoms,
            ac: self.slope.clone(),
            singular,
        }
    }

    /// `|Du|((lo, hi))`.
    pub fn total_variation(&self) -> f64 {
        self.derivative().total_variation()
    }

    /// Jump set together with points carrying Cantor quadrature nodes.
    pub fn jump_points(&self) -> Vec<f64> {
        self.jumps.iter().map(|j| j.x).collect()
    }

    pub fn is_sobolev(&self) -> bool {
        self.jumps.is_empty() && self.cantor.is_empty()
    }
}

/// Devil's staircase on `[lo, hi]` rising by `rise`, as a Cantor part with
/// `2^depth` quadrature nodes.
pub fn devils_staircase(lo: f64, hi: f64, depth: u32, rise: f64) -> Result<BV1D> {
    let nodes = crate::measure1d::cantor_nodes(lo, hi, depth, rise.abs(), vec![rise.signum()]);
    BV1D::new(lo, hi, vec![0.0], None, Vec::new(), nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_steps() -> BV1D {
        BV1D::from_increments(
            0.0,
            1.0,
            vec![0.0],
            None,
            vec![(0.25, vec![1.0]), (0.75, vec![-1.0])],
            Vec::new(),
        )
        .unwrap()
    }

    #[test]
    fn traces_of_two_steps() {
        let u = two_steps();
        assert_eq!(u.trace(0.9, Side::Left).unwrap(), vec![0.0]);
        assert_eq!(u.trace(0.25, Side::Left).unwrap(), vec![0.0]);
        assert_eq!(u.trace(0.25, Side::Right).unwrap(), vec![1.0]);
        assert_eq!(u.value(0.5), vec![1.0]);
        assert_eq!(u.total_variation(), 2.0);
    }

    #[test]
    fn trace_outside_domain_is_an_error() {
        let u = two_steps();
        assert!(matches!(
            u.trace(0.0, Side::Left),
            Err(RelaxError::Domain { .. })
        ));
        assert!(matches!(
            u.trace(1.0, Side::Right),
            Err(RelaxError::Domain { .. })
        ));
        assert!(u.trace(1.0, Side::Left).is_ok());
    }

    #[test]
    fn inconsistent_jump_record_is_rejected() {
        let bad = Jump {
            x: 0.5,
            left: vec![3.0],
            right: vec![4.0],
        };
        assert!(BV1D::new(0.0, 1.0, vec![0.0], None, vec![bad], Vec::new()).is_err());
    }

    #[test]
    fn staircase_rises_by_its_mass() {
        let u = devils_staircase(0.0, 1.0, 8, 1.0).unwrap();
        assert!((u.trace(1.0, Side::Left).unwrap()[0] - 1.0).abs() < 1e-12);
        assert_eq!(u.value(0.5), vec![0.5]);
    }
}
