//! Sampled checks of the growth hypotheses.

use super::model::{FunctionModel, Role};
use crate::vecops::{norm, sample_directions, scale};

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub role: Role,
    pub hypothesis: &'static str,
    pub pass: bool,
    /// Tightest observed constants: `(min, max)` of f for `F1`; for `F2` and
    /// `W`, `lower = min f(b)/|b|` and `upper = max f(b)/(1 + |b|)`.
    pub lower: f64,
    pub upper: f64,
    /// Smallest K with `|b|/K <= f(b) <= K (1 + |b|)` on the samples.
    pub k: f64,
    pub detail: String,
}

/// Samples a box and a set of tail rays and reports the tightest constants
/// for the hypothesis belonging to `role`.
///
/// Linear-growth roles also require `f(T e)/T` to settle along every ray;
/// a ratio still moving at the top of the ladder fails the check.
pub fn check_growth(f: &FunctionModel, role: Role, samples_per_axis: usize) -> GrowthReport {
    let d = f.dim;
    let r = f.search_radius;
    let n = samples_per_axis.max(3);
    let mut points: Vec<Vec<f64>> = Vec::new();
    let grid_axes = if d <= 2 { d } else { 0 };
    if grid_axes > 0 {
        let per = if d == 2 { n.min(201) } else { n };
        let total = per.pow(d as u32);
        for k in 0..total {
            let mut idx = k;
            let mut p = Vec::with_capacity(d);
            for _ in 0..d {
                p.push(-r + 2.0 * r * (idx % per) as f64 / (per - 1) as f64);
                idx /= per;
            }
            points.push(p);
        }
    }
    let dirs = sample_directions(d, 16);
    let ladder: Vec<f64> = (0..=20).map(|k| 2f64.powi(k)).collect();
    for dir in &dirs {
        for frac in [0.25, 0.5, 1.0] {
            points.push(scale(dir, r * frac));
        }
        for &t in &ladder {
            points.push(scale(dir, t));
        }
    }

    let hyp = role.hypothesis();
    let mut detail = String::new();
    let mut pass = true;
    let (lower, upper, k) = match role {
        Role::F1 => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in &points {
                let v = f.eval(p);
                if !v.is_finite() {
                    pass = false;
                    detail = format!("non-finite value at {p:?}");
                }
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if !(lo > 0.0) {
                pass = false;
                detail = format!("infimum {lo} is not positive");
            }
            let decl = f.growth;
            if lo < decl.lower * (1.0 - 1e-9) || hi > decl.upper * (1.0 + 1e-9) {
                pass = false;
                detail = format!(
                    "observed range [{lo}, {hi}] exceeds declared [{}, {}]",
                    decl.lower, decl.upper
                );
            }
            (lo, hi, hi / lo)
        }
        Role::F2 | Role::W => {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            let mut k_lo = 0.0f64;
            for p in &points {
                let v = f.eval(p);
                let nb = norm(p);
                if !v.is_finite() {
                    pass = false;
                    detail = format!("non-finite value at {p:?}");
                    continue;
                }
                hi = hi.max(v / (1.0 + nb));
                if nb > 0.0 {
                    if v <= 0.0 {
                        pass = false;
                        detail = format!("f({p:?}) = {v} is not positive");
                        continue;
                    }
                    lo = lo.min(v / nb);
                    k_lo = k_lo.max(nb / v);
                }
            }
            for dir in &dirs {
                let ratio = |t: f64| f.eval(&scale(dir, t)) / t;
                let a = ratio(ladder[ladder.len() - 2]);
                let b = ratio(ladder[ladder.len() - 1]);
                if !((b - a).abs() <= 1e-3 * a.abs().max(1e-9)) {
                    pass = false;
                    detail = format!(
                        "f(T e)/T has not settled along {dir:?}: {a} then {b}, growth is not linear"
                    );
                }
            }
            let decl = f.growth;
            if pass && (lo < decl.lower * (1.0 - 1e-9) || hi > decl.upper * (1.0 + 1e-9)) {
                pass = false;
                detail = format!(
                    "observed constants lower {lo}, upper {hi} exceed declared lower {}, upper {}",
                    decl.lower, decl.upper
                );
            }
            (lo, hi, hi.max(k_lo))
        }
    };
    GrowthReport {
        role,
        hypothesis: hyp,
        pass,
        lower,
        upper,
        k,
        detail,
    }
}
