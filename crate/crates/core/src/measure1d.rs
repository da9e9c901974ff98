//! Vector-valued Radon measures on a closed interval.
//!
//! A measure is stored as atoms, an absolutely continuous density (a step
//! function) and a finite quadrature of a singular diffuse part (nodes with a
//! mass and a unit direction). A missing density means density zero.

use crate::error::{RelaxError, Result};
use crate::funclib::EnvelopeTable;
use crate::step::StepFn;
use crate::vecops::{add_assign, axpy, is_zero, norm, scale};

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub weight: Vec<f64>,
}

/// One node of the quadrature of a singular diffuse measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularNode {
    pub x: f64,
    pub mass: f64,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measure1D {
    pub lo: f64,
    pub hi: f64,
    pub dim: usize,
    pub atoms: Vec<Atom>,
    pub ac: Option<StepFn>,
    pub singular: Vec<SingularNode>,
}

/// Result of splitting off the atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicSplit {
    pub atomic: Measure1D,
    pub diffuse: Measure1D,
    /// Sorted atom locations.
    pub support: Vec<f64>,
}

impl Measure1D {
    pub fn new(
        lo: f64,
        hi: f64,
        dim: usize,
        mut atoms: Vec<Atom>,
        ac: Option<StepFn>,
        mut singular: Vec<SingularNode>,
    ) -> Result<Self> {
        if !(lo < hi) || dim == 0 {
            return Err(RelaxError::Representation(format!(
                "bad interval [{lo}, {hi}] or dimension {dim}"
            )));
        }
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
        singular.sort_by(|a, b| a.x.total_cmp(&b.x));
        for a in &atoms {
            if !(a.x >= lo && a.x <= hi) {
                return Err(RelaxError::Representation(format!(
                    "atom at {} outside [{lo}, {hi}]",
                    a.x
                )));
            }
            if a.weight.len() != dim
                || a.weight.iter().any(|w| !w.is_finite())
                || is_zero(&a.weight)
            {
                return Err(RelaxError::Representation(format!(
                    "bad atom weight at {}",
                    a.x
                )));
            }
        }
        if atoms.windows(2).any(|w| w[0].x == w[1].x) {
            return Err(RelaxError::Representation("repeated atom location".into()));
        }
        if let Some(s) = &ac {
            let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
            if s.dim() != dim || (s.lo() - lo).abs() > tol || (s.hi() - hi).abs() > tol {
                return Err(RelaxError::Representation(
                    "density must cover the interval and match the dimension".into(),
                ));
            }
        }
        for n in &singular {
            if !(n.x >= lo && n.x <= hi) {
                return Err(RelaxError::Representation(format!(
                    "singular node at {} outside",
                    n.x
                )));
            }
            if !(n.mass >= 0.0)
                || n.direction.len() != dim
                || (norm(&n.direction) - 1.0).abs() > 1e-9
            {
                return Err(RelaxError::Representation(format!(
                    "singular node at {} needs a nonnegative mass and a unit direction",
                    n.x
                )));
            }
            if atoms.iter().any(|a| a.x == n.x) {
                return Err(RelaxError::Representation(format!(
                    "singular node at {} coincides with an atom",
                    n.x
                )));
            }
        }
        if singular.windows(2).any(|w| w[0].x == w[1].x) {
            return Err(RelaxError::Representation("repeated singular node".into()));
        }
        Ok(Self {
            lo,
            hi,
            dim,
            atoms,
            ac,
            singular,
        })
    }

    pub fn zero(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(lo, hi, dim, Vec::new(), None, Vec::new())
    }

    pub fn dirac(lo: f64, hi: f64, x: f64, weight: Vec<f64>) -> Result<Self> {
        let dim = weight.len();
        Self::new(lo, hi, dim, vec![Atom { x, weight }], None, Vec::new())
    }

    pub fn from_density(density: StepFn) -> Result<Self> {
        Self::new(
            density.lo(),
            density.hi(),
            density.dim(),
            Vec::new(),
            Some(density),
            Vec::new(),
        )
    }

    pub fn with_atoms(mut self, atoms: Vec<Atom>) -> Result<Self> {
        self.atoms.extend(atoms);
        Self::new(
            self.lo,
            self.hi,
            self.dim,
            self.atoms,
            self.ac,
            self.singular,
        )
    }

    pub fn with_singular(mut self, nodes: Vec<SingularNode>) -> Result<Self> {
        self.singular.extend(nodes);
        Self::new(
            self.lo,
            self.hi,
            self.dim,
            self.atoms,
            self.ac,
            self.singular,
        )
    }

    pub fn has_ac(&self) -> bool {
        self.ac.is_some()
    }

    /// `(absolutely continuous part, singular part)`.
    pub fn lebesgue_decompose(&self) -> (Measure1D, Measure1D) {
        let ac = Self {
            atoms: Vec::new(),
            singular: Vec::new(),
            ..self.clone()
        };
        let sing = Self {
            ac: None,
            ..self.clone()
        };
        (ac, sing)
    }

    /// Splits off the atoms; `support` lists their locations.
    pub fn atomic_decompose(&self) -> AtomicSplit {
        let atomic = Self {
            ac: None,
            singular: Vec::new(),
            ..self.clone()
        };
        let diffuse = Self {
            atoms: Vec::new(),
            ..self.clone()
        };
        AtomicSplit {
            support: self.atoms.iter().map(|a| a.x).collect(),
            atomic,
            diffuse,
        }
    }

    /// Splits atoms and singular nodes located at `points` (within `tol`)
    /// from the rest. The first measure carries only the tagged parts.
    pub fn split_at_points(&self, points: &[f64], tol: f64) -> (Measure1D, Measure1D) {
        let hit = |x: f64| points.iter().any(|p| (p - x).abs() <= tol);
        let (on_a, off_a): (Vec<_>, Vec<_>) = self.atoms.iter().cloned().partition(|a| hit(a.x));
        let (on_s, off_s): (Vec<_>, Vec<_>) = self.singular.iter().cloned().partition(|n| hit(n.x));
        let on = Self {
            atoms: on_a,
            singular: on_s,
            ac: None,
            ..self.clone()
        };
        let off = Self {
            atoms: off_a,
            singular: off_s,
            ..self.clone()
        };
        (on, off)
    }

    /// `int_A f**(v^a) dx + int_A (f**)^inf(dv^s/d|v^s|) d|v^s|` over the
    /// closed subinterval `A = [a, b]`.
    pub fn nonlinear_transform(&self, env: &EnvelopeTable, a: f64, b: f64) -> f64 {
        let a = a.max(self.lo);
        let b = b.min(self.hi);
        let mut total = 0.0;
        if b > a {
            match &self.ac {
                Some(s) => {
                    for (l, r, v) in s.pieces() {
                        let len = r.min(b) - l.max(a);
                        if len > 0.0 {
                            total += env.eval(v) * len;
                        }
                    }
                }
                None => total += env.eval(&vec![0.0; self.dim]) * (b - a),
            }
        }
        for at in &self.atoms {
            if at.x >= a && at.x <= b {
                total += env.recession(&at.weight);
            }
        }
        for n in &self.singular {
            if n.x >= a && n.x <= b {
                total += n.mass * env.recession(&n.direction);
            }
        }
        total
    }

    /// `int phi dv`, with Simpson's rule on each density piece.
    pub fn pair(&self, phi: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        if let Some(s) = &self.ac {
            for (l, r, v) in s.pieces() {
                let w = (r - l) / 6.0 * (phi(l) + 4.0 * phi(0.5 * (l + r)) + phi(r));
                axpy(&mut out, w, v);
            }
        }
        for at in &self.atoms {
            axpy(&mut out, phi(at.x), &at.weight);
        }
        for n in &self.singular {
            axpy(&mut out, n.mass * phi(n.x), &n.direction);
        }
        out
    }

    /// `v(closed interval)`.
    pub fn total(&self) -> Vec<f64> {
        let mut out = self
            .ac
            .as_ref()
            .map_or(vec![0.0; self.dim], |s| s.integral());
        for at in &self.atoms {
            add_assign(&mut out, &at.weight);
        }
        for n in &self.singular {
            axpy(&mut out, n.mass, &n.direction);
        }
        out
    }

    /// `|v|(closed interval)`.
    pub fn total_variation(&self) -> f64 {
        self.ac.as_ref().map_or(0.0, |s| s.abs_integral())
            + self.atoms.iter().map(|a| norm(&a.weight)).sum::<f64>()
            + self.singular.iter().map(|n| n.mass).sum::<f64>()
    }

    /// `|v|([a, b])`.
    pub fn variation_on(&self, a: f64, b: f64) -> f64 {
        let ac = match &self.ac {
            Some(s) => s
                .pieces()
                .map(|(l, r, v)| (r.min(b) - l.max(a)).max(0.0) * norm(v))
                .sum(),
            None => 0.0,
        };
        ac + self
            .atoms
            .iter()
            .filter(|at| at.x >= a && at.x <= b)
            .map(|at| norm(&at.weight))
            .sum::<f64>()
            + self
                .singular
                .iter()
                .filter(|n| n.x >= a && n.x <= b)
                .map(|n| n.mass)
                .sum::<f64>()
    }

    /// `v(I)` for the closed interval `[a, b]`.
    pub fn mass_on(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = self
            .ac
            .as_ref()
            .map_or(vec![0.0; self.dim], |s| s.integral_over(a, b));
        for at in self.atoms.iter().filter(|at| at.x >= a && at.x <= b) {
            add_assign(&mut out, &at.weight);
        }
        for n in self.singular.iter().filter(|n| n.x >= a && n.x <= b) {
            axpy(&mut out, n.mass, &n.direction);
        }
        out
    }

    /// Sum of two measures on the same interval. Densities must share
    /// breakpoints unless one of them is absent.
    pub fn sum(&self, other: &Measure1D) -> Result<Measure1D> {
        if self.lo != other.lo || self.hi != other.hi || self.dim != other.dim {
            return Err(RelaxError::Representation(
                "measures live on different spaces".into(),
            ));
        }
        let ac = match (&self.ac, &other.ac) {
            (None, None) => None,
            (Some(s), None) | (None, Some(s)) => Some(s.clone()),
            (Some(s), Some(t)) => {
                if s.breaks() != t.breaks() {
                    return Err(RelaxError::Representation(
                        "densities on different meshes".into(),
                    ));
                }
                let vals = s
                    .values()
                    .iter()
                    .zip(t.values())
                    .map(|(a, b)| crate::vecops::add(a, b))
                    .collect();
                Some(StepFn::new(s.breaks().to_vec(), vals)?)
            }
        };
        let mut atoms = self.atoms.clone();
        for a in &other.atoms {
            if let Some(b) = atoms.iter_mut().find(|b| b.x == a.x) {
                add_assign(&mut b.weight, &a.weight);
            } else {
                atoms.push(a.clone());
            }
        }
        atoms.retain(|a| !is_zero(&a.weight));
        let mut singular = self.singular.clone();
        singular.extend(other.singular.iter().cloned());
        Self::new(self.lo, self.hi, self.dim, atoms, ac, singular)
    }

    /// The measure multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Measure1D> {
        if s == 0.0 {
            return Self::zero(self.lo, self.hi, self.dim);
        }
        let ac = match &self.ac {
            Some(d) => Some(d.map(|v| scale(v, s))?),
            None => None,
        };
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                x: a.x,
                weight: scale(&a.weight, s),
            })
            .collect();
        let singular = self
            .singular
            .iter()
            .map(|n| SingularNode {
                x: n.x,
                mass: n.mass * s.abs(),
                direction: scale(&n.direction, s.signum()),
            })
            .collect();
        Self::new(self.lo, self.hi, self.dim, atoms, ac, singular)
    }
}

/// Quadrature of the middle-thirds Cantor measure on `[lo, hi]` with total
/// mass `mass` along `direction`: `2^depth` nodes at the midpoints of the
/// level-`depth` intervals, each of mass `mass / 2^depth`.
pub fn cantor_nodes(
    lo: f64,
    hi: f64,
    depth: u32,
    mass: f64,
    direction: Vec<f64>,
) -> Vec<SingularNode> {
    let mut intervals = vec![(lo, hi)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for (a, b) in intervals {
            let t = (b - a) / 3.0;
            next.push((a, a + t));
            next.push((b - t, b));
        }
        intervals = next;
    }
    let w = mass / intervals.len() as f64;
    intervals
        .into_iter()
        .map(|(a, b)| SingularNode {
            x: 0.5 * (a + b),
            mass: w,
            direction: direction.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_fixture_has_expected_nodes() {
        let nodes = cantor_nodes(0.0, 1.0, 8, 1.0, vec![1.0]);
        assert_eq!(nodes.len(), 256);
        assert!(nodes.iter().all(|n| n.mass == 1.0 / 256.0));
        let total: f64 = nodes.iter().map(|n| n.mass).sum();
        assert!((total - 1.0).abs() < 1e-15);
        // symmetric about 1/2
        let mean: f64 = nodes.iter().map(|n| n.x * n.mass).sum();
        assert!((mean - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_atom_outside_interval() {
        assert!(Measure1D::dirac(0.0, 1.0, 1.5, vec![1.0]).is_err());
    }

    #[test]
    fn total_counts_every_part() {
        let d = StepFn::uniform(0.0, 1.0, vec![vec![1.0], vec![3.0]]).unwrap();
        let m = Measure1D::from_density(d)
            .unwrap()
            .with_atoms(vec![Atom {
                x: 0.2,
                weight: vec![-1.0],
            }])
            .unwrap()
            .with_singular(cantor_nodes(0.0, 1.0, 3, 0.5, vec![1.0]))
            .unwrap();
        assert!((m.total()[0] - (2.0 - 1.0 + 0.5)).abs() < 1e-15);
        assert!((m.total_variation() - (2.0 + 1.0 + 0.5)).abs() < 1e-15);
    }
}
