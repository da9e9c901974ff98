use std::fmt::Write as _;

/// One concentration-point contribution.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTerm {
    pub location: Vec<f64>,
    pub value: f64,
}

/// Relaxed energy split into its terms. `total` is their sum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyReport {
    pub total: f64,
    pub diffuse_f2_term: f64,
    pub diffuse_w_term: f64,
    pub jump_terms: Vec<JumpTerm>,
    pub boundary_left: f64,
    pub boundary_right: f64,
    /// `f1min int (f2**)^inf d|v^s|` (n >= 2).
    pub singular_v_term: f64,
    /// `int g(u, v^a) dx` (n >= 2).
    pub g_term: f64,
    /// Difference between the diffuse terms on the working mesh and on a mesh
    /// of half the resolution.
    pub quadrature_error: f64,
}

impl EnergyReport {
    pub fn jump_sum(&self) -> f64 {
        self.jump_terms.iter().map(|j| j.value).sum()
    }

    /// Recomputes `total` from the terms, in a fixed order.
    pub fn finalize(&mut self) {
        self.total = self.diffuse_f2_term
            + self.diffuse_w_term
            + self.jump_sum()
            + self.boundary_left
            + self.boundary_right
            + self.singular_v_term
            + self.g_term;
    }

    pub fn sum_defect(&self) -> f64 {
        let s = self.diffuse_f2_term
            + self.diffuse_w_term
            + self.jump_sum()
            + self.boundary_left
            + self.boundary_right
            + self.singular_v_term
            + self.g_term;
        (self.total - s).abs() / s.abs().max(1.0)
    }

    /// `key = value` lines.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "total = {:.15e}", self.total);
        let _ = writeln!(s, "diffuse_f2_term = {:.15e}", self.diffuse_f2_term);
        let _ = writeln!(s, "diffuse_w_term = {:.15e}", self.diffuse_w_term);
        let _ = writeln!(s, "jump_sum = {:.15e}", self.jump_sum());
        let _ = writeln!(s, "jump_count = {}", self.jump_terms.len());
        let _ = writeln!(s, "boundary_left = {:.15e}", self.boundary_left);
        let _ = writeln!(s, "boundary_right = {:.15e}", self.boundary_right);
        let _ = writeln!(s, "singular_v_term = {:.15e}", self.singular_v_term);
        let _ = writeln!(s, "g_term = {:.15e}", self.g_term);
        let _ = writeln!(s, "quadrature_error = {:.3e}", self.quadrature_error);
        for (k, j) in self.jump_terms.iter().enumerate() {
            let loc: Vec<String> = j.location.iter().map(|x| format!("{x:.12}")).collect();
            let _ = writeln!(s, "jump.{k} = {} @ [{}]", fmt_e(j.value), loc.join(", "));
        }
        s
    }

    pub const CSV_HEADER: &'static str = "total,diffuse_f2_term,diffuse_w_term,jump_sum,boundary_left,boundary_right,singular_v_term,g_term,quadrature_error";

    pub fn to_csv_row(&self) -> String {
        [
            self.total,
            self.diffuse_f2_term,
            self.diffuse_w_term,
            self.jump_sum(),
            self.boundary_left,
            self.boundary_right,
            self.singular_v_term,
            self.g_term,
            self.quadrature_error,
        ]
        .iter()
        .map(|v| fmt_e(*v))
        .collect::<Vec<_>>()
        .join(",")
    }
}

fn fmt_e(v: f64) -> String {
    format!("{v:.15e}")
}
