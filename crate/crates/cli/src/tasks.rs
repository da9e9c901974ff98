//! The scenario tasks. Each task returns its artifacts in memory; writing
//! them out is left to the caller.

use relaxkit::bv1d::Side;
use relaxkit::relax::{
    evaluate_relaxed_1d_with, evaluate_relaxed_nd, g_density, solve_cell_fw0, EnergyReport,
    EvalOptions,
};
use relaxkit::sequences::{
    build_recovery_1d, build_recovery_nd, concentration_detector, gamma_probe, DetectorThresholds,
    Params, ProbeOptions, SequencePair, Target,
};
use relaxkit::RelaxError;

use crate::scenario::{CellCase, Dimension, Docs, Loaded};
use crate::CliError;

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Default)]
pub struct TaskOutput {
    pub artifacts: Vec<Artifact>,
    /// `key = value` lines for the run summary.
    pub summary: Vec<(String, String)>,
    /// Set when the task ran but a numerical check failed.
    pub failure: Option<String>,
}

impl TaskOutput {
    fn file(&mut self, name: &str, text: String) {
        self.artifacts.push(Artifact {
            name: name.to_string(),
            bytes: text.into_bytes(),
        });
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub seed: u64,
    pub svg: bool,
}

fn e(x: f64) -> String {
    format!("{x:.15e}")
}

fn lib(err: RelaxError) -> CliError {
    match err {
        RelaxError::Numerical(_) | RelaxError::RecessionEstimation { .. } => {
            CliError::Numerical(err.to_string())
        }
        other => CliError::Validation(other.to_string()),
    }
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Io(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn run_task(l: &Loaded, task: &str, opts: RunOptions) -> Result<TaskOutput, CliError> {
    match task {
        "evaluate" => evaluate(l),
        "cell" => cells(l),
        "g_table" => g_table(l),
        "recover" => recover(l),
        "probe" => probe(l, opts),
        "concentration" => concentration(l),
        other => Err(CliError::Validation(format!(
            "tasks: unknown task `{other}`"
        ))),
    }
}

fn report(l: &Loaded) -> Result<EnergyReport, CliError> {
    match &l.docs {
        Docs::Line(u, v) => {
            let opts = EvalOptions {
                base_cells: l.scenario.mesh.base_cells,
                cross_check_nodes: Some(l.scenario.mesh.cell_nodes),
            };
            evaluate_relaxed_1d_with(&l.ints, u, v, &opts).map_err(lib)
        }
        Docs::Mesh(u, v) => evaluate_relaxed_nd(&l.ints, u, v).map_err(lib),
        Docs::None => Err(CliError::Validation(
            "u_doc: required by the task list".into(),
        )),
    }
}

fn evaluate(l: &Loaded) -> Result<TaskOutput, CliError> {
    let r = report(l)?;
    let mut out = TaskOutput::default();
    let mut kv = format!("scenario = {}\n", l.scenario.name);
    kv.push_str(&r.to_kv());
    out.file("report.kv", kv);
    out.file(
        "report.csv",
        format!("{}\n{}\n", EnergyReport::CSV_HEADER, r.to_csv_row()),
    );
    out.note("total", e(r.total));
    Ok(out)
}

/// Concentration points of the documents: jumps of `u` and interior atoms
/// of `v`.
fn derived_cells(l: &Loaded) -> Result<Vec<(Option<f64>, CellCase)>, CliError> {
    let Docs::Line(u, v) = &l.docs else {
        return Ok(Vec::new());
    };
    let mut xs: Vec<f64> = u
        .jumps
        .iter()
        .map(|j| j.x)
        .chain(
            v.atoms
                .iter()
                .map(|a| a.x)
                .filter(|&x| x > u.lo && x < u.hi),
        )
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.into_iter()
        .map(|x| {
            let a_minus = u.trace(x, Side::Left).map_err(lib)?[0];
            let a_plus = u.trace(x, Side::Right).map_err(lib)?[0];
            let b = v
                .atoms
                .iter()
                .filter(|a| a.x == x)
                .map(|a| a.weight[0])
                .sum();
            Ok((Some(x), CellCase { a_minus, a_plus, b }))
        })
        .collect()
}

fn cells(l: &Loaded) -> Result<TaskOutput, CliError> {
    if l.ints.m() != 1 || l.ints.d() != 1 {
        return Err(CliError::Validation("cells: scalar u and v only".into()));
    }
    let cases: Vec<(Option<f64>, CellCase)> = if l.scenario.cells.is_empty() {
        derived_cells(l)?
    } else {
        l.scenario.cells.iter().map(|c| (None, c.clone())).collect()
    };
    let mut rows = Vec::with_capacity(cases.len());
    let mut bad = Vec::new();
    for (x, c) in &cases {
        let s = solve_cell_fw0(
            &l.ints,
            &[c.a_plus],
            &[c.a_minus],
            &[c.b],
            l.scenario.mesh.cell_nodes,
        )
        .map_err(lib)?;
        if !s.agree {
            bad.push(format!("({}, {}, {})", c.a_minus, c.a_plus, c.b));
        }
        rows.push(vec![
            x.map_or(String::new(), e),
            e(c.a_minus),
            e(c.a_plus),
            e(c.b),
            e(s.value),
            e(s.reduced_value),
            s.agree.to_string(),
        ]);
    }
    let mut out = TaskOutput::default();
    out.file(
        "cells.csv",
        csv_text(
            &["x", "a_minus", "a_plus", "b", "direct", "reduced", "agree"],
            &rows,
        )?,
    );
    out.note("cells", rows.len());
    if !bad.is_empty() {
        out.failure = Some(format!("cell solvers disagree at {}", bad.join(", ")));
    }
    Ok(out)
}

fn g_table(l: &Loaded) -> Result<TaskOutput, CliError> {
    let g = l
        .scenario
        .g_table
        .as_ref()
        .ok_or_else(|| CliError::Validation("g_table: section missing".into()))?;
    let mut rows = Vec::new();
    for &a in &g.a {
        for i in 0..g.b_steps {
            let b = g.b_min + (g.b_max - g.b_min) * i as f64 / (g.b_steps - 1) as f64;
            let v = g_density(&l.ints, &[a], &[b]).map_err(lib)?;
            rows.push(vec![e(a), e(b), e(v)]);
        }
    }
    let mut out = TaskOutput::default();
    out.file("g_table.csv", csv_text(&["a", "b", "g"], &rows)?);
    out.note("g_rows", rows.len());
    Ok(out)
}

fn schedule(l: &Loaded) -> Vec<Params> {
    let s = &l.scenario.schedule;
    (s.k_min..=s.k_max)
        .map(|k| match l.scenario.dimension {
            Dimension::One => Params::new(k, 2f64.powi(-(k as i32)), 0.0, 0.0),
            Dimension::Two => Params::new(
                k,
                2f64.powi(-(1i32 << (k + 2))),
                2f64.powi(-(k as i32)),
                2f64.powi(-(k as i32 + 1)),
            ),
        })
        .collect()
}

fn target(l: &Loaded) -> Result<Target, CliError> {
    match &l.docs {
        Docs::Line(u, v) => Ok(Target::Line(u.clone(), v.clone())),
        Docs::Mesh(u, v) => Ok(Target::Mesh(u.clone(), v.clone())),
        Docs::None => Err(CliError::Validation(
            "u_doc: required by the task list".into(),
        )),
    }
}

fn member(l: &Loaded, p: Params) -> relaxkit::Result<SequencePair> {
    match &l.docs {
        Docs::Line(u, v) => {
            build_recovery_1d(&l.ints, u, v, p.epsilon, l.scenario.mesh.cell_nodes, p)
        }
        Docs::Mesh(u, v) => build_recovery_nd(&l.ints, u, v, p).map(|r| r.0),
        Docs::None => Err(RelaxError::Precondition("no documents".into())),
    }
}

fn members(l: &Loaded) -> Result<Vec<SequencePair>, CliError> {
    schedule(l)
        .into_iter()
        .map(|p| member(l, p).map_err(lib))
        .collect()
}

fn recover(l: &Loaded) -> Result<TaskOutput, CliError> {
    let relaxed = report(l)?.total;
    let pairs = members(l)?;
    let rows: Vec<Vec<String>> = pairs
        .iter()
        .map(|p| {
            vec![
                p.params.k.to_string(),
                e(p.params.epsilon),
                e(p.energy),
                e(relaxed),
                e(p.energy - relaxed),
                e(p.mass()),
            ]
        })
        .collect();
    let mut out = TaskOutput::default();
    out.file(
        "recover.csv",
        csv_text(
            &["k", "epsilon", "energy", "relaxed_value", "gap", "mass"],
            &rows,
        )?,
    );
    let last = pairs.last().expect("schedule is nonempty");
    out.note("recover_last_gap", e(last.energy - relaxed));
    let tol = l.scenario.schedule.tol * relaxed.abs().max(1.0);
    if (last.energy - relaxed).abs() > tol {
        out.failure = Some(format!(
            "recovery energy {} is not within {tol} of the relaxed value {relaxed}",
            last.energy
        ));
    }
    Ok(out)
}

fn probe(l: &Loaded, opts: RunOptions) -> Result<TaskOutput, CliError> {
    let t = target(l)?;
    let po = ProbeOptions {
        tol: l.scenario.schedule.tol,
        seed: opts.seed,
        ..ProbeOptions::default()
    };
    let gen = |p: Params| member(l, p);
    let r = gamma_probe(&l.ints, &t, &gen, &schedule(l), &po).map_err(lib)?;
    let mut out = TaskOutput::default();
    out.file("probe.csv", r.to_csv().map_err(lib)?);
    if opts.svg {
        out.file("probe.svg", r.to_svg());
    }
    out.note("probe_liminf", e(r.liminf_estimate));
    out.note("probe_pass", r.pass);
    if !r.pass {
        out.failure = Some(format!(
            "probe failed: liminf {} vs relaxed {} (weak convergence {})",
            r.liminf_estimate, r.relaxed_value, r.weak_ok
        ));
    }
    Ok(out)
}

fn concentration(l: &Loaded) -> Result<TaskOutput, CliError> {
    let pairs = members(l)?;
    let r = concentration_detector(&pairs, &DetectorThresholds::default()).map_err(lib)?;
    let rows: Vec<Vec<String>> = pairs
        .iter()
        .zip(r.supports.iter().zip(&r.masses))
        .map(|(p, (s, m))| vec![p.params.k.to_string(), e(p.params.epsilon), e(*s), e(*m)])
        .collect();
    let mut out = TaskOutput::default();
    out.file(
        "concentration.csv",
        csv_text(
            &["k", "epsilon", "support_above_level", "mass_above_level"],
            &rows,
        )?,
    );
    out.note("concentration_level", e(r.level));
    out.note("concentrating", r.concentrating);
    Ok(out)
}
