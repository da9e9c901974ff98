use std::fmt;
use std::sync::Arc;

use super::lattice::Lattice;
use crate::error::{RelaxError, Result};

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    ClosedFormPreset,
    SampledGrid,
}

/// Which slot of the functional a model is used in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    F1,
    F2,
    W,
}

impl Role {
    pub fn hypothesis(self) -> &'static str {
        match self {
            Role::F1 => "H1",
            Role::F2 => "H2",
            Role::W => "H3",
        }
    }
}

/// Declared growth constants.
///
/// For an `F1` model these are `C1 <= f <= C2`. For `F2` and `W` models they
/// are `lower * |b| <= f(b) <= upper * (1 + |b|)`, so a constant `K` in the
/// usual two-sided form is `lower = 1/K`, `upper = K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants {
    pub lower: f64,
    pub upper: f64,
}

/// A real-valued integrand on R^d, either a closed-form preset or sampled data.
#[derive(Clone)]
pub struct FunctionModel {
    pub name: String,
    pub kind: ModelKind,
    pub dim: usize,
    pub growth: GrowthConstants,
    pub convex: bool,
    /// Known infimum together with a point where it is attained.
    pub known_min: Option<(f64, Vec<f64>)>,
    /// Radius of the box scanned when a minimum or growth constants are needed.
    pub search_radius: f64,
    eval: ScalarField,
    known_envelope: Option<ScalarField>,
    known_recession: Option<ScalarField>,
}

impl fmt::Debug for FunctionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionModel")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .field("growth", &self.growth)
            .field("convex", &self.convex)
            .field("known_min", &self.known_min)
            .finish_non_exhaustive()
    }
}

impl FunctionModel {
    pub fn closed_form(
        name: impl Into<String>,
        dim: usize,
        growth: GrowthConstants,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind: ModelKind::ClosedFormPreset,
            dim,
            growth,
            convex: false,
            known_min: None,
            search_radius: 8.0,
            eval: Arc::new(eval),
            known_envelope: None,
            known_recession: None,
        }
    }

    /// Piecewise-linear interpolation of nodal samples, continued affinely
    /// outside the lattice.
    pub fn sampled(
        name: impl Into<String>,
        lattice: Lattice,
        values: Vec<f64>,
        growth: GrowthConstants,
    ) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(RelaxError::Representation(format!(
                "expected {} samples, got {}",
                lattice.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RelaxError::Representation("non-finite sample".into()));
        }
        let dim = lattice.dim();
        let radius = lattice
            .lo
            .iter()
            .chain(&lattice.hi)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let eval = move |x: &[f64]| lattice.interpolate(&values, x);
        let mut m = Self::closed_form(name, dim, growth, eval);
        m.kind = ModelKind::SampledGrid;
        m.search_radius = radius;
        Ok(m)
    }

    pub fn with_envelope(mut self, env: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.known_envelope = Some(Arc::new(env));
        self
    }

    pub fn with_recession(mut self, rec: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.known_recession = Some(Arc::new(rec));
        self
    }

    /// Marks the model convex; it then serves as its own envelope.
    pub fn convex(mut self) -> Self {
        self.convex = true;
        self.known_envelope = Some(self.eval.clone());
        self
    }

    pub fn with_min(mut self, value: f64, at: Vec<f64>) -> Self {
        self.known_min = Some((value, at));
        self
    }

    pub fn with_search_radius(mut self, r: f64) -> Self {
        self.search_radius = r;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn eval_scalar(&self, x: f64) -> f64 {
        (self.eval)(&[x])
    }

    pub fn field(&self) -> ScalarField {
        self.eval.clone()
    }

    pub fn known_envelope(&self) -> Option<&ScalarField> {
        self.known_envelope.as_ref()
    }

    pub fn known_recession(&self) -> Option<&ScalarField> {
        self.known_recession.as_ref()
    }
}
