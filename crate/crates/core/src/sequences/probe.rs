//! Numerical checks of liminf and limsup behaviour along a sequence.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::pair::{line_pair_u, Params, SeqV, SequencePair};
use crate::bv1d::BV1D;
use crate::error::{RelaxError, Result};
use crate::measure1d::Measure1D;
use crate::mesh::{MeasureND, MeshField};
use crate::relax::{evaluate_relaxed_1d, evaluate_relaxed_nd, Integrands};
use crate::vecops::{gauss_legendre_unit, norm};

/// The limit pair a sequence is expected to approach.
#[derive(Debug, Clone)]
pub enum Target {
    Line(BV1D, Measure1D),
    Mesh(MeshField, MeasureND),
}

impl Target {
    pub fn relaxed(&self, ints: &Integrands) -> Result<f64> {
        Ok(match self {
            Target::Line(u, v) => evaluate_relaxed_1d(ints, u, v)?.total,
            Target::Mesh(u, v) => evaluate_relaxed_nd(ints, u, v)?.total,
        })
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Target::Line(u, _) => (vec![u.lo], vec![u.hi]),
            Target::Mesh(u, _) => (u.grid.lo.clone(), u.grid.hi.clone()),
        }
    }

    fn pair_u(&self, phi: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
        match self {
            Target::Line(u, _) => line_pair_u(u, phi),
            Target::Mesh(u, _) => mesh_pair_u(u, phi),
        }
    }

    fn pair_v(&self, phi: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
        match self {
            Target::Line(_, v) => v.pair(|x| phi(&[x])),
            Target::Mesh(_, v) => v.pair(phi),
        }
    }
}

fn mesh_pair_u(u: &MeshField, phi: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
    let g = &u.grid;
    let n = g.dim();
    let (gx, gw) = gauss_legendre_unit(3);
    let mut out = vec![0.0; u.dim];
    let mut p = vec![0.0; n];
    for cell in 0..g.num_cells() {
        let idx = g.cell_multi(cell);
        for q in 0..gx.len().pow(n as u32) {
            let (mut r, mut w) = (q, g.cell_volume());
            for a in 0..n {
                let j = r % gx.len();
                r /= gx.len();
                p[a] = g.lo[a] + g.h(a) * (idx[a] as f64 + gx[j]);
                w *= gw[j];
            }
            let (val, _) = u.value_and_gradient_in(cell, &p);
            let f = w * phi(&p);
            for (o, y) in out.iter_mut().zip(&val) {
                *o += f * y;
            }
        }
    }
    out
}

/// Seeded smooth test functions on a box; the first one is constant.
#[derive(Debug, Clone)]
pub struct TestBattery {
    lo: Vec<f64>,
    hi: Vec<f64>,
    waves: Vec<(Vec<f64>, f64)>,
}

impl TestBattery {
    pub const SIZE: usize = 16;

    pub fn new(seed: u64, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = lo.len();
        let mut waves = vec![(vec![0.0; n], 0.0)];
        while waves.len() < Self::SIZE {
            let freq: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=3) as f64).collect();
            let phase = rng.gen_range(0.0..2.0 * PI);
            waves.push((freq, phase));
        }
        Self { lo, hi, waves }
    }

    pub fn len(&self) -> usize {
        self.waves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    /// Value of the `i`-th function at `x`.
    pub fn eval(&self, i: usize, x: &[f64]) -> f64 {
        let (freq, phase) = &self.waves[i];
        if i == 0 {
            return 1.0;
        }
        let arg: f64 = (0..x.len())
            .map(|a| freq[a] * PI * (x[a] - self.lo[a]) / (self.hi[a] - self.lo[a]))
            .sum();
        (arg + phase).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    /// Relative energy tolerance.
    pub tol: f64,
    /// Tolerance on the pairings with the test battery, relative to `1 + |limit|`.
    pub weak_tol: f64,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            tol: 0.05,
            weak_tol: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub params: Params,
    pub energy: f64,
    pub relaxed_value: f64,
    /// `energy - relaxed_value`.
    pub gap: f64,
    pub support_measure: f64,
    pub mass: f64,
    /// Largest pairing error against the battery, relative to `1 + |limit|`.
    pub weak_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    pub relaxed_value: f64,
    /// Smallest energy over the finer half of the schedule.
    pub liminf_estimate: f64,
    pub weak_ok: bool,
    pub tol: f64,
    pub pass: bool,
}

impl ProbeReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| RelaxError::Representation(format!("csv: {e}"));
        w.write_record([
            "k",
            "epsilon",
            "delta",
            "eta",
            "energy",
            "relaxed_value",
            "gap",
            "support_measure",
            "mass",
        ])
        .map_err(io)?;
        for r in &self.rows {
            let p = r.params;
            w.write_record(&[
                p.k.to_string(),
                format!("{:e}", p.epsilon),
                format!("{:e}", p.delta),
                format!("{:e}", p.eta),
                format!("{:.12e}", r.energy),
                format!("{:.12e}", r.relaxed_value),
                format!("{:.12e}", r.gap),
                format!("{:.12e}", r.support_measure),
                format!("{:.12e}", r.mass),
            ])
            .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| RelaxError::Representation(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| RelaxError::Representation(e.to_string()))
    }

    /// Energy against `k`, with the relaxed value as a dashed line.
    pub fn to_svg(&self) -> String {
        let (w, h, pad) = (480.0, 320.0, 40.0);
        let ks: Vec<f64> = self.rows.iter().map(|r| r.params.k as f64).collect();
        let es: Vec<f64> = self.rows.iter().map(|r| r.energy).collect();
        let (k0, k1) = ks
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| {
                (a.min(k), b.max(k))
            });
        let (mut e0, mut e1) = es
            .iter()
            .chain(std::iter::once(&self.relaxed_value))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| {
                (a.min(e), b.max(e))
            });
        if !(e1 > e0) {
            e0 -= 1.0;
            e1 += 1.0;
        }
        let kspan = if k1 > k0 { k1 - k0 } else { 1.0 };
        let sx = |k: f64| pad + (k - k0) / kspan * (w - 2.0 * pad);
        let sy = |e: f64| h - pad - (e - e0) / (e1 - e0) * (h - 2.0 * pad);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#
        );
        let _ = writeln!(
            s,
            r#"<line x1="{pad}" y1="{y:.2}" x2="{x2}" y2="{y:.2}" stroke="gray" stroke-dasharray="4"/>"#,
            y = sy(self.relaxed_value),
            x2 = w - pad
        );
        let pts: Vec<String> = ks
            .iter()
            .zip(&es)
            .map(|(&k, &e)| format!("{:.2},{:.2}", sx(k), sy(e)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="black" points="{}"/>"#,
            pts.join(" ")
        );
        for (&k, &e) in ks.iter().zip(&es) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, sx(k), sy(e));
        }
        let _ = writeln!(
            s,
            r#"<text x="{pad}" y="{}" font-size="12">k</text>"#,
            h - 10.0
        );
        let _ = writeln!(
            s,
            r#"<text x="4" y="{}" font-size="12">energy</text>"#,
            pad - 10.0
        );
        s.push_str("</svg>\n");
        s
    }
}

/// Largest pairing error of `pair` against the target over the battery.
fn weak_error(pair: &SequencePair, target: &Target, battery: &TestBattery) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..battery.len() {
        let phi = |x: &[f64]| battery.eval(i, x);
        let checks = [
            (pair.pair_v(&phi), target.pair_v(&phi)),
            (pair.pair_u(&phi)?, target.pair_u(&phi)),
        ];
        for (got, want) in checks {
            if got.len() != want.len() {
                return Err(RelaxError::Representation(
                    "sequence and target dimensions differ".into(),
                ));
            }
            for (a, b) in got.iter().zip(&want) {
                worst = worst.max((a - b).abs() / (1.0 + b.abs()));
            }
        }
    }
    Ok(worst)
}

/// Builds the sequence along `schedule` and compares its energies with the
/// relaxed value of `target`.
///
/// `pass` requires weak convergence on the last member, no member of the
/// finer half below the relaxed value by more than the tolerance, and the
/// last energy within the tolerance.
pub fn gamma_probe(
    ints: &Integrands,
    target: &Target,
    generator: &dyn Fn(Params) -> Result<SequencePair>,
    schedule: &[Params],
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    if schedule.is_empty() {
        return Err(RelaxError::Precondition("empty schedule".into()));
    }
    let relaxed = target.relaxed(ints)?;
    let (lo, hi) = target.bounds();
    let battery = TestBattery::new(opts.seed, lo, hi);
    let mut rows = Vec::with_capacity(schedule.len());
    for &p in schedule {
        let pair = generator(p)?;
        rows.push(ProbeRow {
            params: p,
            energy: pair.energy,
            relaxed_value: relaxed,
            gap: pair.energy - relaxed,
            support_measure: pair.support_measure(),
            mass: pair.mass(),
            weak_error: weak_error(&pair, target, &battery)?,
        });
    }
    let half = rows.len() / 2;
    let liminf = rows[half..]
        .iter()
        .map(|r| r.energy)
        .fold(f64::INFINITY, f64::min);
    let tol = opts.tol * relaxed.abs().max(1.0);
    let last = rows.last().expect("nonempty schedule");
    let weak_ok = last.weak_error <= opts.weak_tol;
    let pass = weak_ok && liminf - relaxed >= -tol && (last.energy - relaxed).abs() <= tol;
    Ok(ProbeReport {
        rows,
        relaxed_value: relaxed,
        liminf_estimate: liminf,
        weak_ok,
        tol,
        pass,
    })
}

/// Limits used to call a sequence of densities concentrating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorThresholds {
    /// Densities count as large above this multiple of the mean density of
    /// the first member.
    pub level_factor: f64,
    /// Largest final support of the large part, relative to the domain.
    pub support_fraction: f64,
    /// Largest final support of the large part, relative to the first one.
    pub shrink_factor: f64,
    /// Smallest ratio between the least and the largest mass of the large part.
    pub mass_ratio: f64,
}

impl Default for DetectorThresholds {
    fn default() -> Self {
        Self {
            level_factor: 4.0,
            support_fraction: 0.01,
            shrink_factor: 0.1,
            mass_ratio: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub level: f64,
    /// `L({|v_k| > level})` per member.
    pub supports: Vec<f64>,
    /// `int_{|v_k| > level} |v_k|` per member.
    pub masses: Vec<f64>,
    pub concentrating: bool,
}

/// Support and mass of `{|v| > t}`.
pub fn mass_above(pair: &SequencePair, t: f64) -> (f64, f64) {
    match &pair.v {
        SeqV::Line(v) => v
            .pieces()
            .filter(|(_, _, x)| norm(x) > t)
            .fold((0.0, 0.0), |(s, m), (a, b, x)| {
                (s + b - a, m + (b - a) * norm(x))
            }),
        SeqV::Mesh(v) => {
            let g = &v.grid;
            let vol = g.cell_volume();
            let (mut s, mut m) = (0.0, 0.0);
            for b in &v.base {
                if norm(b) > t {
                    s += vol;
                    m += vol * norm(b);
                }
            }
            for sp in &v.spikes {
                let b = v.base_at(&sp.center);
                let with: Vec<f64> = b.iter().zip(&sp.density).map(|(x, y)| x + y).collect();
                if norm(b) > t {
                    s -= sp.volume;
                    m -= sp.volume * norm(b);
                }
                if norm(&with) > t {
                    s += sp.volume;
                    m += sp.volume * norm(&with);
                }
            }
            (s, m)
        }
    }
}

/// Classifies a sequence as concentrating when the large part of `v_k`
/// shrinks to a small support while keeping a fixed share of mass.
pub fn concentration_detector(
    pairs: &[SequencePair],
    th: &DetectorThresholds,
) -> Result<ConcentrationReport> {
    let first = pairs
        .first()
        .ok_or_else(|| RelaxError::Precondition("no sequence members".into()))?;
    let omega = first.domain_measure();
    let level = th.level_factor * first.mass() / omega;
    let (supports, masses): (Vec<f64>, Vec<f64>) =
        pairs.iter().map(|p| mass_above(p, level)).unzip();
    let shrinking = supports
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
    let last = *supports.last().expect("nonempty");
    let small = last <= th.support_fraction * omega && last <= th.shrink_factor * supports[0];
    let (mmin, mmax) = masses
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
    let kept = mmax > 0.0 && mmin >= th.mass_ratio * mmax;
    Ok(ConcentrationReport {
        level,
        supports,
        masses,
        concentrating: shrinking && small && kept,
    })
}
