//! Splitting a bounded family of densities into an oscillating part and a
//! concentrating part by truncation.

use crate::error::{RelaxError, Result};
use crate::step::StepFn;
use crate::vecops::norm;

/// Truncation levels tried, in order.
pub const LEVELS: std::ops::RangeInclusive<i32> = 0..=30;

#[derive(Debug, Clone, PartialEq)]
pub struct OscConc {
    /// Truncation level `t_k`.
    pub level: f64,
    /// `z` with its norm capped at `t_k`.
    pub osc: StepFn,
    /// `z - osc`, supported where `|z| > t_k`.
    pub conc: StepFn,
    /// `L({conc != 0})`.
    pub conc_support: f64,
    /// `int |conc|`.
    pub conc_mass: f64,
}

/// `L({|z| > t})`.
fn measure_above(z: &StepFn, t: f64) -> f64 {
    z.pieces()
        .filter(|(_, _, v)| norm(v) > t)
        .map(|(a, b, _)| b - a)
        .sum()
}

/// Splits each `z_k` (`k = 1, 2, ...` in order) at the smallest level
/// `t = 2^i`, `i = 0..=30`, for which `L({|z_k| > t}) <= L(domain) / k`.
///
/// Fails when some `int |z_k|` exceeds `mass_bound`.
pub fn decompose_osc_conc(z: &[StepFn], mass_bound: f64) -> Result<Vec<OscConc>> {
    let mut out = Vec::with_capacity(z.len());
    for (i, zk) in z.iter().enumerate() {
        let mass = zk.abs_integral();
        if !mass.is_finite() || mass > mass_bound {
            return Err(RelaxError::Precondition(format!(
                "member {} has mass {mass}, above the bound {mass_bound}",
                i + 1
            )));
        }
        let k = (i + 1) as f64;
        let budget = (zk.hi() - zk.lo()) / k;
        let level = LEVELS
            .map(|e| 2f64.powi(e))
            .find(|&t| measure_above(zk, t) <= budget)
            .unwrap_or(2f64.powi(*LEVELS.end()));
        let osc = zk.map(|v| {
            let r = norm(v);
            if r > level {
                v.iter().map(|x| x * level / r).collect()
            } else {
                v.to_vec()
            }
        })?;
        let conc = zk.map(|v| {
            let r = norm(v);
            if r > level {
                v.iter().map(|x| x * (1.0 - level / r)).collect()
            } else {
                vec![0.0; v.len()]
            }
        })?;
        out.push(OscConc {
            level,
            conc_support: conc.support_measure(),
            conc_mass: conc.abs_integral(),
            osc,
            conc,
        });
    }
    Ok(out)
}

/// `int |f(z) - f(osc) - f(conc) + f(0)|`, the defect of the splitting for
/// an integrand `f`.
pub fn splitting_defect(f: &dyn Fn(&[f64]) -> f64, z: &StepFn, split: &OscConc) -> f64 {
    let zero = vec![0.0; z.dim()];
    let f0 = f(&zero);
    z.pieces()
        .map(|(a, b, v)| {
            let m = 0.5 * (a + b);
            (b - a) * (f(v) - f(split.osc.value_at(m)) - f(split.conc.value_at(m)) + f0).abs()
        })
        .sum()
}
