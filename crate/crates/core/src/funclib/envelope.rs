//! Convex envelopes, recession functions and their convergence witnesses.

use std::fmt;

use super::hull::{lower_hull_1d, lower_hull_at};
use super::lattice::Lattice;
use super::model::{FunctionModel, GrowthConstants, ScalarField};
use crate::error::{RelaxError, Result};
use crate::vecops::{norm, sample_directions, scale};

/// Exponents k of the ladder T = 2^k used for recession estimates.
const REC_LADDER: std::ops::RangeInclusive<i32> = 4..=20;
/// Exponents of the t ladder on which the witness sigma is tabulated.
const SIGMA_LADDER: std::ops::RangeInclusive<i32> = -4..=20;
const REC_TOL: f64 = 1e-6;

/// The lower convex envelope of a model on a sampling box, with its recession
/// function and a tabulated convergence witness.
#[derive(Clone)]
pub struct EnvelopeTable {
    pub name: String,
    pub dim: usize,
    pub lattice: Option<Lattice>,
    /// Envelope values at the lattice nodes.
    pub values: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub recession_values: Vec<f64>,
    pub sigma: SigmaTable,
    /// Largest deviation between a supplied closed form and the numeric hull
    /// (or the dominance defect when no hull can be computed).
    pub residual: Option<f64>,
    /// The source model was declared convex.
    pub source_convex: bool,
    pub growth: GrowthConstants,
    closed_form: Option<ScalarField>,
    closed_recession: Option<ScalarField>,
    /// Recession values along +1 and -1 when dim == 1.
    rec_1d: Option<(f64, f64)>,
}

impl fmt::Debug for EnvelopeTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnvelopeTable")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("closed_form", &self.closed_form.is_some())
            .field("residual", &self.residual)
            .finish_non_exhaustive()
    }
}

/// sigma(t) on a geometric ladder, non-increasing in t.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTable {
    pub t: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl SigmaTable {
    /// Value at the largest ladder point not exceeding `t` (the first entry
    /// below the ladder).
    pub fn at(&self, t: f64) -> f64 {
        let k = self.t.partition_point(|&s| s <= t);
        self.sigma[k.saturating_sub(1)]
    }
}

/// Sampling box for [`convex_envelope`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeOptions {
    pub radius: f64,
    /// Nodes per axis.
    pub resolution: usize,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self {
            radius: 8.0,
            resolution: 801,
        }
    }
}

impl EnvelopeOptions {
    pub fn new(radius: f64, resolution: usize) -> Self {
        Self { radius, resolution }
    }

    /// Default resolution per dimension (coarser in 2D where each node costs a
    /// small linear program).
    pub fn for_dim(d: usize) -> Self {
        if d == 1 {
            Self::default()
        } else {
            Self::new(8.0, 33)
        }
    }
}

/// Lower convex envelope of `f` sampled on `[-r, r]^d`.
///
/// A supplied closed-form envelope is used directly and compared with the
/// numeric hull. Outside the box the envelope is continued affinely with the
/// gradient of the boundary cell.
pub fn convex_envelope(f: &FunctionModel, opts: &EnvelopeOptions) -> Result<EnvelopeTable> {
    let d = f.dim;
    if d > 2 && f.known_envelope().is_none() {
        return Err(RelaxError::UnsupportedDimension {
            dim: d,
            reason: "numeric envelopes are computed for d <= 2 only".into(),
        });
    }
    let lattice = if d <= 2 {
        let n = if d == 2 {
            opts.resolution.min(65)
        } else {
            opts.resolution
        };
        Some(Lattice::symmetric(d, opts.radius, n)?)
    } else {
        None
    };

    let mut values = Vec::new();
    let mut residual = None;
    if let Some(lat) = &lattice {
        let nodes = lat.nodes();
        let samples: Vec<f64> = nodes.iter().map(|p| f.eval(p)).collect();
        check_sampled_growth(f, &nodes, &samples)?;
        let hull = if d == 1 {
            let xs: Vec<f64> = nodes.iter().map(|p| p[0]).collect();
            lower_hull_1d(&xs, &samples)
        } else if f.convex {
            samples.clone()
        } else {
            lower_hull_2d(lat, &samples)?
        };
        if let Some(env) = f.known_envelope() {
            let known: Vec<f64> = nodes.iter().map(|p| env(p)).collect();
            residual = Some(
                known
                    .iter()
                    .zip(&hull)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
            values = known;
        } else {
            values = hull;
        }
    } else if let Some(env) = f.known_envelope() {
        // dominance defect on a coarse probe set
        let mut defect = 0.0f64;
        for dir in sample_directions(d, 0) {
            for r in [0.0, 0.5, 1.0, 2.0, 4.0] {
                let p = scale(&dir, r);
                defect = defect.max(env(&p) - f.eval(&p));
            }
        }
        residual = Some(defect.max(0.0));
    }

    let mut table = EnvelopeTable {
        name: format!("{}**", f.name),
        dim: d,
        lattice,
        values,
        directions: Vec::new(),
        recession_values: Vec::new(),
        sigma: SigmaTable {
            t: Vec::new(),
            sigma: Vec::new(),
        },
        residual,
        source_convex: f.convex,
        growth: f.growth,
        closed_form: f.known_envelope().cloned(),
        closed_recession: f.known_recession().cloned(),
        rec_1d: None,
    };
    table.finish()?;
    Ok(table)
}

fn check_sampled_growth(f: &FunctionModel, nodes: &[Vec<f64>], samples: &[f64]) -> Result<()> {
    let GrowthConstants { lower, upper } = f.growth;
    for (p, &v) in nodes.iter().zip(samples) {
        let r = norm(p);
        let lo = lower * r;
        let hi = upper * (1.0 + r);
        if v < lo - 1e-9 * (1.0 + lo) || v > hi + 1e-9 * (1.0 + hi) {
            return Err(RelaxError::HypothesisViolation {
                hypothesis: "H2/H3",
                detail: format!(
                    "{}({:?}) = {v} outside [{lo}, {hi}] from the declared growth constants",
                    f.name, p
                ),
            });
        }
    }
    Ok(())
}

fn lower_hull_2d(lat: &Lattice, samples: &[f64]) -> Result<Vec<f64>> {
    let nodes = lat.nodes();
    let points: Vec<[f64; 2]> = nodes.iter().map(|p| [p[0], p[1]]).collect();
    let (nx, ny) = (lat.n[0] - 1, lat.n[1] - 1);
    let c00 = lat.flat_index(&[0, 0]);
    let c10 = lat.flat_index(&[nx, 0]);
    let c01 = lat.flat_index(&[0, ny]);
    let c11 = lat.flat_index(&[nx, ny]);
    let mut out = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        let s = (p[0] - lat.lo[0]) / (lat.hi[0] - lat.lo[0]);
        let t = (p[1] - lat.lo[1]) / (lat.hi[1] - lat.lo[1]);
        let start = if s >= t {
            [c00, c10, c11]
        } else {
            [c00, c11, c01]
        };
        let v = lower_hull_at(&points, samples, *p, start)
            .ok_or_else(|| RelaxError::Numerical(format!("hull program failed at node {k}")))?;
        out.push(v.min(samples[k]));
    }
    Ok(out)
}

impl EnvelopeTable {
    /// Envelope value at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        if let Some(f) = &self.closed_form {
            return f(x);
        }
        let lat = self.lattice.as_ref().expect("numeric table has a lattice");
        lat.interpolate(&self.values, x)
    }

    pub fn eval_scalar(&self, x: f64) -> f64 {
        self.eval(&[x])
    }

    /// Recession value along `b`, using cached or closed-form data.
    pub fn recession(&self, b: &[f64]) -> f64 {
        let r = norm(b);
        if r == 0.0 {
            return 0.0;
        }
        if let Some(rec) = &self.closed_recession {
            return rec(b);
        }
        if let Some((pos, neg)) = self.rec_1d {
            return if b[0] > 0.0 { b[0] * pos } else { -b[0] * neg };
        }
        let dir = scale(b, 1.0 / r);
        r * self.ladder(&dir).0
    }

    pub fn recession_scalar(&self, b: f64) -> f64 {
        self.recession(&[b])
    }

    /// Recession value with the ladder convergence check applied.
    pub fn recession_checked(&self, b: &[f64]) -> Result<f64> {
        let r = norm(b);
        if r == 0.0 {
            return Ok(0.0);
        }
        if let Some(rec) = &self.closed_recession {
            return Ok(rec(b));
        }
        let dir = scale(b, 1.0 / r);
        let (est, spread) = self.ladder(&dir);
        if !(spread <= REC_TOL * est.abs().max(1.0)) {
            return Err(RelaxError::RecessionEstimation {
                direction: dir,
                spread,
            });
        }
        Ok(r * est)
    }

    /// Richardson estimate `2 r(T) - r(T/2)` at the top of the ladder and the
    /// spread between the two largest estimates.
    fn ladder(&self, dir: &[f64]) -> (f64, f64) {
        let ratio = |k: i32| {
            let t = 2f64.powi(k);
            self.eval(&scale(dir, t)) / t
        };
        let top = *REC_LADDER.end();
        let r = [ratio(top - 2), ratio(top - 1), ratio(top)];
        let e1 = 2.0 * r[1] - r[0];
        let e2 = 2.0 * r[2] - r[1];
        (e2, (e2 - e1).abs())
    }

    /// Convergence witness for `h(t b) / t -> h^inf(b)` on `|b| <= 1`.
    pub fn sigma_at(&self, t: f64) -> f64 {
        self.sigma.at(t)
    }

    fn finish(&mut self) -> Result<()> {
        let dirs = sample_directions(self.dim, 64);
        let mut rec = Vec::with_capacity(dirs.len());
        for dir in &dirs {
            let v = self.recession_checked(dir)?;
            if !v.is_finite() {
                return Err(RelaxError::RecessionEstimation {
                    direction: dir.clone(),
                    spread: f64::INFINITY,
                });
            }
            rec.push(v);
        }
        if self.dim == 1 && self.closed_recession.is_none() {
            // directions are [+1], [-1]
            self.rec_1d = Some((rec[0], rec[1]));
        }
        self.directions = dirs;
        self.recession_values = rec;
        self.sigma = self.build_sigma();
        Ok(())
    }

    fn build_sigma(&self) -> SigmaTable {
        let radii = [0.25, 0.5, 0.75, 1.0];
        let ts: Vec<f64> = SIGMA_LADDER.map(|k| 2f64.powi(k)).collect();
        let mut raw: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let mut worst = (self.eval(&vec![0.0; self.dim]) / t).abs();
                for (dir, &rv) in self.directions.iter().zip(&self.recession_values) {
                    for &r in &radii {
                        let b = scale(dir, r);
                        let dev = (r * rv - self.eval(&scale(&b, t)) / t).abs();
                        worst = worst.max(dev);
                    }
                }
                worst
            })
            .collect();
        for k in (0..raw.len().saturating_sub(1)).rev() {
            raw[k] = raw[k].max(raw[k + 1]);
        }
        SigmaTable { t: ts, sigma: raw }
    }

    /// The envelope as a sampled model, for re-enveloping.
    pub fn as_model(&self) -> Result<FunctionModel> {
        let lat = self
            .lattice
            .clone()
            .ok_or_else(|| RelaxError::UnsupportedDimension {
                dim: self.dim,
                reason: "table has no lattice".into(),
            })?;
        FunctionModel::sampled(self.name.clone(), lat, self.values.clone(), self.growth)
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }
}
