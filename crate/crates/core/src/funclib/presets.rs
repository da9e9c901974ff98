//! Named integrands and user presets loaded from sampled-data files.

use std::path::Path;

use serde::Deserialize;

use super::lattice::Lattice;
use super::model::{FunctionModel, GrowthConstants};
use crate::error::{RelaxError, Result};
use crate::vecops::norm;

const fn g(lower: f64, upper: f64) -> GrowthConstants {
    GrowthConstants { lower, upper }
}

/// Built-in preset names with a one-line description.
pub const PRESETS: &[(&str, &str)] = &[
    ("abs", "|b| on R"),
    ("abs2", "|b| on R^2"),
    ("area", "sqrt(1 + |b|^2) on R"),
    ("area2", "sqrt(1 + |b|^2) on R^2"),
    ("maxabs1", "max(|b|, 1) on R"),
    ("tilted_area", "sqrt(1 + b^2) + b/2 on R"),
    ("doublewell_shifted", "min(|b - 1|, |b + 1|) + 1 on R"),
    ("doublewell2", "min(|b - e1|, |b + e1|) + 1 on R^2"),
    ("square", "b^2 on R (superlinear)"),
    ("example3_f1", "2 - exp(-u^2) on R"),
    ("example3_f1_2", "2 - exp(-|u|^2) on R^2"),
    ("bump_f1", "1 + u^2 / (1 + u^2) on R"),
    ("cos_f1", "3/2 - cos(pi u) / 2 on R"),
    ("decay_f1", "1 + 1 / (1 + u^2) on R (infimum not attained)"),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Looks up a built-in preset.
pub fn preset(name: &str) -> Result<FunctionModel> {
    let m = match name {
        "abs" => FunctionModel::closed_form(name, 1, g(1.0, 1.0), |b| b[0].abs())
            .convex()
            .with_recession(|b| b[0].abs()),
        "abs2" => FunctionModel::closed_form(name, 2, g(1.0, 1.0), norm)
            .convex()
            .with_recession(norm),
        "area" => FunctionModel::closed_form(name, 1, g(1.0, 1.0), |b| b[0].hypot(1.0))
            .convex()
            .with_recession(|b| b[0].abs()),
        "area2" => FunctionModel::closed_form(name, 2, g(1.0, 1.0), |b| norm(b).hypot(1.0))
            .convex()
            .with_recession(norm),
        "maxabs1" => FunctionModel::closed_form(name, 1, g(1.0, 1.0), |b| b[0].abs().max(1.0))
            .convex()
            .with_recession(|b| b[0].abs()),
        "tilted_area" => {
            FunctionModel::closed_form(name, 1, g(0.5, 2.0), |b| b[0].hypot(1.0) + 0.5 * b[0])
                .convex()
                .with_recession(|b| b[0].abs() + 0.5 * b[0])
        }
        "doublewell_shifted" => FunctionModel::closed_form(name, 1, g(1.0, 2.0), |b| {
            (b[0] - 1.0).abs().min((b[0] + 1.0).abs()) + 1.0
        })
        .with_envelope(|b| b[0].abs().max(1.0))
        .with_recession(|b| b[0].abs()),
        "doublewell2" => FunctionModel::closed_form(name, 2, g(1.0, 2.0), |b| {
            let p = (b[0] - 1.0).hypot(b[1]);
            let m = (b[0] + 1.0).hypot(b[1]);
            p.min(m) + 1.0
        })
        .with_recession(norm),
        "square" => FunctionModel::closed_form(name, 1, g(1.0, 1.0), |b| b[0] * b[0])
            .convex()
            .with_search_radius(8.0),
        "example3_f1" => {
            FunctionModel::closed_form(name, 1, g(1.0, 2.0), |u| 2.0 - (-u[0] * u[0]).exp())
                .with_min(1.0, vec![0.0])
        }
        "example3_f1_2" => FunctionModel::closed_form(name, 2, g(1.0, 2.0), |u| {
            2.0 - (-(u[0] * u[0] + u[1] * u[1])).exp()
        })
        .with_min(1.0, vec![0.0, 0.0]),
        "bump_f1" => FunctionModel::closed_form(name, 1, g(1.0, 2.0), |u| {
            let s = u[0] * u[0];
            1.0 + s / (1.0 + s)
        })
        .with_min(1.0, vec![0.0]),
        "cos_f1" => FunctionModel::closed_form(name, 1, g(1.0, 2.0), |u| {
            1.5 - 0.5 * (std::f64::consts::PI * u[0]).cos()
        })
        .with_min(1.0, vec![0.0]),
        "decay_f1" => {
            FunctionModel::closed_form(name, 1, g(1.0, 2.0), |u| 1.0 + 1.0 / (1.0 + u[0] * u[0]))
                .with_search_radius(64.0)
        }
        _ => return Err(RelaxError::UnknownPreset(name.to_string())),
    };
    Ok(m)
}

/// File format for a sampled user preset.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledPresetDoc {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub nodes: Vec<usize>,
    /// Nodal samples, first axis fastest.
    pub values: Vec<f64>,
    #[serde(default)]
    pub convex: bool,
}

impl SampledPresetDoc {
    pub fn into_model(self) -> Result<FunctionModel> {
        let lat = Lattice::new(self.lo, self.hi, self.nodes)?;
        let m = FunctionModel::sampled(self.name, lat, self.values, g(self.lower, self.upper))?;
        Ok(if self.convex { m.convex() } else { m })
    }
}

/// Loads every `*.toml` sampled preset in `dir`, sorted by file name.
pub fn load_user_presets(dir: &Path) -> Result<Vec<FunctionModel>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| RelaxError::Document(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p)
                .map_err(|e| RelaxError::Document(format!("{}: {e}", p.display())))?;
            let doc: SampledPresetDoc = toml::from_str(&text)
                .map_err(|e| RelaxError::Document(format!("{}: {e}", p.display())))?;
            doc.into_model()
        })
        .collect()
}

/// Resolves a preset name against user presets first, then built-ins.
pub fn resolve(name: &str, user: &[FunctionModel]) -> Result<FunctionModel> {
    if let Some(m) = user.iter().find(|m| m.name == name) {
        return Ok(m.clone());
    }
    preset(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_resolves() {
        for name in preset_names() {
            let m = preset(name).unwrap();
            assert_eq!(m.name, name);
            assert!(m.eval(&vec![0.3; m.dim]).is_finite());
        }
        assert!(matches!(preset("nope"), Err(RelaxError::UnknownPreset(_))));
    }

    #[test]
    fn sampled_doc_builds_interpolating_model() {
        let doc: SampledPresetDoc = toml::from_str(
            r#"
            name = "v"
            lower = 0.5
            upper = 2.0
            lo = [-2.0]
            hi = [2.0]
            nodes = [5]
            values = [2.0, 1.0, 0.0, 1.0, 2.0]
            "#,
        )
        .unwrap();
        let m = doc.into_model().unwrap();
        assert_eq!(m.eval(&[0.5]), 0.5);
        assert_eq!(m.eval(&[3.0]), 3.0);
    }
}
