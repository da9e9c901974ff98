//! Integrand models, convex envelopes, recession functions and growth checks.

mod envelope;
mod growth;
mod hull;
mod lattice;
mod model;
pub mod presets;

pub use envelope::{convex_envelope, EnvelopeOptions, EnvelopeTable, SigmaTable};
pub use growth::{check_growth, GrowthReport};
pub use hull::{lower_hull_1d, lower_hull_at};
pub use lattice::Lattice;
pub use model::{FunctionModel, GrowthConstants, ModelKind, Role, ScalarField};
pub use presets::{preset, preset_names, resolve};

use crate::minimize::minimize_in_box;

/// Infimum of an `F1` model and a point where it is (nearly) attained.
///
/// Uses the model's known minimum when present, otherwise scans the box of
/// radius `search_radius`.
pub fn f1_infimum(f1: &FunctionModel) -> (f64, Vec<f64>) {
    if let Some((v, at)) = &f1.known_min {
        return (*v, at.clone());
    }
    let center = vec![0.0; f1.dim];
    let (v, at) = minimize_in_box(|z| f1.eval(z), &center, f1.search_radius, &[]);
    (v, at)
}
