//! Evaluators for the relaxed functionals: the coupling density `g`, the cell
//! formula at concentration points, the one-dimensional formula and the
//! n-dimensional formula on rectangular meshes.

mod cell;
mod eval1d;
mod evalnd;
mod g;
mod report;

pub use cell::{
    boundary_minimizer, boundary_term, reduced_cell_value, solve_cell_fw0, BoundarySide,
    CellSolution,
};
pub use eval1d::{evaluate_relaxed_1d, evaluate_relaxed_1d_with, theta_measure, EvalOptions};
pub use evalnd::evaluate_relaxed_nd;
pub use g::{g_density, g_split, GSplit};
pub use report::{EnergyReport, JumpTerm};

use crate::error::{RelaxError, Result};
use crate::funclib::{
    convex_envelope, f1_infimum, preset, EnvelopeOptions, EnvelopeTable, FunctionModel,
};

/// The three integrands together with the derived envelopes and `f1min`.
#[derive(Debug, Clone)]
pub struct Integrands {
    pub f1: FunctionModel,
    pub f2: FunctionModel,
    pub w: FunctionModel,
    pub f2env: EnvelopeTable,
    pub wenv: EnvelopeTable,
    pub f1min: f64,
    /// A point where `f1` attains (or nearly attains) `f1min`.
    pub f1argmin: Vec<f64>,
}

impl Integrands {
    pub fn new(f1: FunctionModel, f2: FunctionModel, w: FunctionModel) -> Result<Self> {
        let f2o = EnvelopeOptions::for_dim(f2.dim);
        let wo = EnvelopeOptions::for_dim(w.dim);
        Self::with_options(f1, f2, w, &f2o, &wo)
    }

    pub fn with_options(
        f1: FunctionModel,
        f2: FunctionModel,
        w: FunctionModel,
        f2_opts: &EnvelopeOptions,
        w_opts: &EnvelopeOptions,
    ) -> Result<Self> {
        if !w.dim.is_multiple_of(f1.dim) {
            return Err(RelaxError::Representation(format!(
                "W acts on {}-vectors, which is not a multiple of dim f1 = {}",
                w.dim, f1.dim
            )));
        }
        let f2env = convex_envelope(&f2, f2_opts)?;
        let wenv = convex_envelope(&w, w_opts)?;
        let (f1min, f1argmin) = f1_infimum(&f1);
        Ok(Self {
            f1,
            f2,
            w,
            f2env,
            wenv,
            f1min,
            f1argmin,
        })
    }

    pub fn from_presets(f1: &str, f2: &str, w: &str) -> Result<Self> {
        Self::new(preset(f1)?, preset(f2)?, preset(w)?)
    }

    /// Example 3: `f1 = 2 - exp(-u^2)`, `f2 = |.|`, `W = sqrt(1 + |.|^2)` in
    /// dimension `n` (1 or 2).
    pub fn example3(n: usize) -> Result<Self> {
        let w = if n == 1 { "area" } else { "area2" };
        Self::from_presets("example3_f1", "abs", w)
    }

    /// Target dimension m.
    pub fn m(&self) -> usize {
        self.f1.dim
    }

    /// Dimension d of the measure variable.
    pub fn d(&self) -> usize {
        self.f2.dim
    }

    /// `f1(a)`.
    pub fn f1_at(&self, a: &[f64]) -> f64 {
        self.f1.eval(a)
    }

    /// Constant `beta = C2 K + kappa` of the growth bound
    /// `F(u, v, A) <= beta (L(A) + |Du|(A) + |v|(A))`.
    pub fn growth_beta(&self) -> f64 {
        let c2 = self.f1.growth.upper;
        let k = self.f2.growth.upper.max(1.0 / self.f2.growth.lower);
        let kappa = self.w.growth.upper.max(1.0 / self.w.growth.lower);
        c2 * k + kappa
    }
}
