//! Scenario files: schema, loading and validation.

use std::path::{Path, PathBuf};

use relaxkit::bv1d::BV1D;
use relaxkit::docs::TomlDoc;
use relaxkit::funclib::presets::load_user_presets;
use relaxkit::funclib::{check_growth, resolve, FunctionModel, Role};
use relaxkit::measure1d::Measure1D;
use relaxkit::mesh::{MeasureND, MeshField};
use relaxkit::relax::Integrands;
use relaxkit::RelaxError;
use serde::Deserialize;

use crate::CliError;

pub const TASKS: [&str; 6] = [
    "evaluate",
    "cell",
    "g_table",
    "recover",
    "probe",
    "concentration",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Dimension {
    #[serde(rename = "1d")]
    One,
    #[serde(rename = "2d")]
    Two,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandNames {
    pub f1: String,
    pub f2: String,
    pub w: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Mesh {
    /// Nodes of the direct cell solver.
    pub cell_nodes: usize,
    /// Uniform cells of the 1D quadrature mesh.
    pub base_cells: usize,
    /// Dyadic level of the 2D comparison mollifier.
    pub mollify_level: u32,
}

impl Default for Mesh {
    fn default() -> Self {
        Self {
            cell_nodes: 256,
            base_cells: 1024,
            mollify_level: 6,
        }
    }
}

/// Members `k_min..=k_max`. In 1D `eps = 2^-k`; in 2D the spike schedule
/// `eps = 2^-(2^(k+2))`, `delta = 2^-k`, `eta = 2^-(k+1)` is used.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    pub k_min: usize,
    pub k_max: usize,
    pub tol: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            k_min: 3,
            k_max: 8,
            tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GTable {
    pub a: Vec<f64>,
    pub b_min: f64,
    pub b_max: f64,
    pub b_steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellCase {
    pub a_minus: f64,
    pub a_plus: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub dimension: Dimension,
    pub integrands: IntegrandNames,
    pub u_doc: Option<PathBuf>,
    pub v_doc: Option<PathBuf>,
    pub tasks: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub mesh: Mesh,
    #[serde(default)]
    pub schedule: Schedule,
    pub g_table: Option<GTable>,
    /// Explicit cell cases; without them the cells come from the documents.
    #[serde(default)]
    pub cells: Vec<CellCase>,
}

pub enum Docs {
    None,
    Line(BV1D, Measure1D),
    Mesh(MeshField, MeasureND),
}

/// A scenario with everything it references resolved.
pub struct Loaded {
    pub scenario: Scenario,
    pub dir: PathBuf,
    pub ints: Integrands,
    pub docs: Docs,
    pub notes: Vec<String>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// User preset directories from `RELAXKIT_PRESET_PATH`.
pub fn user_presets() -> Result<Vec<FunctionModel>, CliError> {
    let Some(var) = std::env::var_os("RELAXKIT_PRESET_PATH") else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for dir in std::env::split_paths(&var).filter(|p| !p.as_os_str().is_empty()) {
        out.extend(
            load_user_presets(&dir).map_err(|e| invalid(format!("RELAXKIT_PRESET_PATH: {e}")))?,
        );
    }
    Ok(out)
}

pub fn parse(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("scenario {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| invalid(format!("scenario {}: {e}", path.display())))
}

fn needs_docs(task: &str) -> bool {
    task != "g_table" && task != "cell"
}

fn resolve_role(
    field: &str,
    name: &str,
    role: Role,
    user: &[FunctionModel],
) -> Result<FunctionModel, CliError> {
    let m = resolve(name, user).map_err(|e| match e {
        RelaxError::UnknownPreset(_) => {
            invalid(format!("integrands.{field}: unknown preset `{name}`"))
        }
        other => invalid(format!("integrands.{field}: {other}")),
    })?;
    let report = check_growth(&m, role, 41);
    if !report.pass {
        return Err(invalid(format!(
            "integrands.{field}: preset `{name}` violates {}: {}",
            report.hypothesis, report.detail
        )));
    }
    Ok(m)
}

fn doc_path(dir: &Path, field: &str, p: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let p = p
        .as_ref()
        .ok_or_else(|| invalid(format!("{field}: required by the task list")))?;
    let full = dir.join(p);
    if !full.is_file() {
        return Err(invalid(format!(
            "{field}: file {} not found",
            full.display()
        )));
    }
    Ok(full)
}

/// Parses and checks a scenario, loading presets and documents.
pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let scenario = parse(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut notes = Vec::new();

    if scenario.tasks.is_empty() {
        return Err(invalid("tasks: the task list is empty"));
    }
    for t in &scenario.tasks {
        if !TASKS.contains(&t.as_str()) {
            return Err(invalid(format!(
                "tasks: unknown task `{t}` (known: {})",
                TASKS.join(", ")
            )));
        }
    }
    let s = &scenario.schedule;
    if s.k_min == 0 || s.k_min > s.k_max || s.k_max > 30 {
        return Err(invalid(format!(
            "schedule: need 1 <= k_min <= k_max <= 30, got {}..{}",
            s.k_min, s.k_max
        )));
    }
    if scenario.dimension == Dimension::Two && s.k_max > 8 {
        return Err(invalid(
            "schedule.k_max: the 2d spike schedule is limited to k <= 8",
        ));
    }
    if !(s.tol > 0.0) {
        return Err(invalid("schedule.tol: must be positive"));
    }
    if scenario.mesh.cell_nodes < 8 {
        return Err(invalid("mesh.cell_nodes: at least 8 nodes"));
    }
    if scenario.mesh.base_cells == 0 {
        return Err(invalid("mesh.base_cells: must be positive"));
    }
    if scenario.tasks.iter().any(|t| t == "g_table") {
        match &scenario.g_table {
            None => return Err(invalid("g_table: section required by the g_table task")),
            Some(g) if g.a.is_empty() || g.b_steps < 2 || !(g.b_min < g.b_max) => {
                return Err(invalid(
                    "g_table: need a nonempty `a`, b_min < b_max and b_steps >= 2",
                ))
            }
            _ => {}
        }
    }

    let user = user_presets()?;
    let names = &scenario.integrands;
    let f1 = resolve_role("f1", &names.f1, Role::F1, &user)?;
    let f2 = resolve_role("f2", &names.f2, Role::F2, &user)?;
    let w = resolve_role("w", &names.w, Role::W, &user)?;
    let n = match scenario.dimension {
        Dimension::One => 1,
        Dimension::Two => 2,
    };
    if w.dim != f1.dim * n {
        return Err(invalid(format!(
            "integrands.w: acts on R^{}, dimension {n} with f1 on R^{} needs R^{}",
            w.dim,
            f1.dim,
            f1.dim * n
        )));
    }
    let ints = Integrands::new(f1, f2, w).map_err(|e| invalid(format!("integrands: {e}")))?;

    let docs = if scenario.tasks.iter().any(|t| needs_docs(t))
        || scenario.u_doc.is_some()
        || scenario.v_doc.is_some()
    {
        let up = doc_path(&dir, "u_doc", &scenario.u_doc)?;
        let vp = doc_path(&dir, "v_doc", &scenario.v_doc)?;
        let docs = match scenario.dimension {
            Dimension::One => Docs::Line(
                BV1D::load(&up).map_err(|e| invalid(format!("u_doc: {e}")))?,
                Measure1D::load(&vp).map_err(|e| invalid(format!("v_doc: {e}")))?,
            ),
            Dimension::Two => Docs::Mesh(
                MeshField::load(&up).map_err(|e| invalid(format!("u_doc: {e}")))?,
                MeasureND::load(&vp).map_err(|e| invalid(format!("v_doc: {e}")))?,
            ),
        };
        check_doc_dims(&docs, &ints)?;
        docs
    } else {
        Docs::None
    };

    if scenario.tasks.iter().any(|t| t == "cell") {
        if n != 1 {
            return Err(invalid("tasks: the cell task needs dimension = \"1d\""));
        }
        if scenario.cells.is_empty() && !matches!(docs, Docs::Line(..)) {
            return Err(invalid("cells: give explicit cases or u_doc and v_doc"));
        }
    }
    if scenario.tasks.iter().any(|t| t == "g_table") && (ints.m() != 1 || ints.d() != 1) {
        return Err(invalid(
            "g_table: tables are written for scalar u and v only",
        ));
    }
    if ints.f1min <= 0.0 {
        notes.push(format!("f1 infimum {} is not positive", ints.f1min));
    }
    Ok(Loaded {
        scenario,
        dir,
        ints,
        docs,
        notes,
    })
}

fn check_doc_dims(docs: &Docs, ints: &Integrands) -> Result<(), CliError> {
    let (ud, vd, un, vn) = match docs {
        Docs::None => return Ok(()),
        Docs::Line(u, v) => {
            if u.lo != v.lo || u.hi != v.hi {
                return Err(invalid("v_doc: the interval differs from u_doc"));
            }
            (u.dim, v.dim, 1, 1)
        }
        Docs::Mesh(u, v) => {
            if u.grid != v.grid {
                return Err(invalid("v_doc: the grid differs from u_doc"));
            }
            (u.dim, v.dim, u.grid.dim(), v.grid.dim())
        }
    };
    if un != vn || (docs_are_mesh(docs) && un != 2) {
        return Err(invalid("u_doc: dimension flag and document grid disagree"));
    }
    if ud != ints.m() {
        return Err(invalid(format!(
            "u_doc: values in R^{ud}, f1 expects R^{}",
            ints.m()
        )));
    }
    if vd != ints.d() {
        return Err(invalid(format!(
            "v_doc: values in R^{vd}, f2 expects R^{}",
            ints.d()
        )));
    }
    Ok(())
}

fn docs_are_mesh(docs: &Docs) -> bool {
    matches!(docs, Docs::Mesh(..))
}
