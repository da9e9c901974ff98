use super::Integrands;
use crate::error::{RelaxError, Result};
use crate::funclib::EnvelopeTable;
use crate::minimize::polish;
use crate::vecops::{norm, scale, sub};

const GRID: usize = 33;
const ROUNDS: usize = 3;

/// Value of `g(a, b)` and the minimizing `b1` (the part of `b` kept in the
/// bulk; `b - b1` is the part sent to concentration).
#[derive(Debug, Clone, PartialEq)]
pub struct GSplit {
    pub value: f64,
    pub b1: Vec<f64>,
}

/// `g(a, b) = min_{b1} f1(a) f2**(b1) + f1min (f2**)^inf(b - b1)`.
pub fn g_density(ints: &Integrands, a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(g_split(ints.f1_at(a), &ints.f2env, ints.f1min, b)?.value)
}

/// The minimization behind [`g_density`] for a given weight `f1a = f1(a)`.
///
/// Candidates `b1 = b` and `b1 = 0` are evaluated first, so the result never
/// exceeds either; ties keep the earlier candidate. When `f1a == f1min` the
/// split `b1 = b` is optimal and returned directly.
pub fn g_split(f1a: f64, f2env: &EnvelopeTable, f1min: f64, b: &[f64]) -> Result<GSplit> {
    let d = b.len();
    if d == 0 || d > 2 {
        return Err(RelaxError::UnsupportedDimension {
            dim: d,
            reason: "g is minimized numerically for d <= 2".into(),
        });
    }
    let phi = |b1: &[f64]| f1a * f2env.eval(b1) + f1min * f2env.recession(&sub(b, b1));
    let keep = b.to_vec();
    let keep_v = f1a * f2env.eval(b);
    if f1a <= f1min {
        return Ok(GSplit {
            value: keep_v,
            b1: keep,
        });
    }
    let zero = vec![0.0; d];
    let zero_v = phi(&zero);
    let (mut best_v, mut best) = if zero_v < keep_v {
        (zero_v, zero)
    } else {
        (keep_v, keep)
    };

    let mut center = scale(b, 0.5);
    let mut half = 2.0 * (norm(b) + 1.0);
    let mut p = vec![0.0; d];
    for round in 0..=ROUNDS {
        let h = 2.0 * half / (GRID - 1) as f64;
        for k in 0..GRID.pow(d as u32) {
            let mut idx = k;
            for a in 0..d {
                p[a] = center[a] - half + h * (idx % GRID) as f64;
                idx /= GRID;
            }
            let v = phi(&p);
            if v < best_v {
                best_v = v;
                best.copy_from_slice(&p);
            }
        }
        if round < ROUNDS {
            center = best.clone();
            half /= 4.0;
        } else {
            let (v, x) = polish(&phi, best_v, best.clone(), h);
            best_v = v;
            best = x;
        }
    }
    Ok(GSplit {
        value: best_v,
        b1: best,
    })
}
