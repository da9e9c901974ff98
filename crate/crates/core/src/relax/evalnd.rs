use super::g::g_split;
use super::report::{EnergyReport, JumpTerm};
use super::Integrands;
use crate::error::{RelaxError, Result};
use crate::mesh::{MeasureND, MeshField};
use crate::vecops::{gauss_legendre_unit, is_zero};

/// Relaxed energy of `(u, v)` on a rectangular mesh in two or three
/// dimensions.
///
/// The bulk term uses `W**`, which is the quasiconvex envelope only when `W`
/// is convex or `u` is scalar; any other combination is rejected.
pub fn evaluate_relaxed_nd(
    ints: &Integrands,
    u: &MeshField,
    v: &MeasureND,
) -> Result<EnergyReport> {
    let grid = &u.grid;
    let n = grid.dim();
    let m = ints.m();
    if !ints.w.convex && m != 1 {
        return Err(RelaxError::Unsupported(
            "quasiconvex envelopes of non-convex W with vector targets are not computed".into(),
        ));
    }
    if u.dim != m || v.dim != ints.d() || ints.wenv.dim != m * n {
        return Err(RelaxError::Representation(format!(
            "dimensions: u in R^{}, v in R^{}, W on R^{}; expected R^{m}, R^{}, R^{}",
            u.dim,
            v.dim,
            ints.wenv.dim,
            ints.d(),
            m * n
        )));
    }
    if v.grid != *grid {
        return Err(RelaxError::Representation(
            "u and v use different meshes".into(),
        ));
    }

    let (xs, ws) = gauss_legendre_unit(3);
    let q = xs.len().pow(n as u32);
    let vol = grid.cell_volume();
    let zero = vec![0.0; v.dim];
    let zero_density = ints.f2env.eval(&zero) == 0.0;
    let mut bulk = 0.0;
    let mut bulk_mid = 0.0;
    let mut gsum = 0.0;
    let mut gsum_mid = 0.0;
    for cell in 0..grid.num_cells() {
        let idx = grid.cell_multi(cell);
        let rho =
            v.ac.as_ref()
                .map_or(zero.as_slice(), |d| d[cell].as_slice());
        let g_trivial = is_zero(rho) && zero_density;
        let g_at = |a: &[f64]| -> Result<f64> {
            if g_trivial {
                Ok(0.0)
            } else {
                Ok(g_split(ints.f1.eval(a), &ints.f2env, ints.f1min, rho)?.value)
            }
        };
        let mut wacc = 0.0;
        let mut gacc = 0.0;
        for k in 0..q {
            let mut p = Vec::with_capacity(n);
            let mut wt = 1.0;
            let mut r = k;
            for a in 0..n {
                let j = r % xs.len();
                r /= xs.len();
                p.push(grid.lo[a] + grid.h(a) * (idx[a] as f64 + xs[j]));
                wt *= ws[j];
            }
            let (val, grad) = u.value_and_gradient_in(cell, &p);
            wacc += wt * ints.wenv.eval(&grad);
            gacc += wt * g_at(&val)?;
        }
        bulk += vol * wacc;
        gsum += vol * gacc;
        let c = grid.cell_center(cell);
        let (val, grad) = u.value_and_gradient_in(cell, &c);
        bulk_mid += vol * ints.wenv.eval(&grad);
        gsum_mid += vol * g_at(&val)?;
    }

    let mut rep = EnergyReport {
        diffuse_w_term: bulk,
        g_term: gsum,
        quadrature_error: (bulk - bulk_mid).abs() + (gsum - gsum_mid).abs(),
        ..Default::default()
    };
    for f in &u.face_jumps {
        let (area, center) = u.face_geometry(f);
        let mut xi = vec![0.0; m * n];
        for k in 0..m {
            xi[k * n + f.axis] = f.jump[k];
        }
        rep.jump_terms.push(JumpTerm {
            location: center,
            value: area * ints.wenv.recession(&xi),
        });
    }
    let mut sing = 0.0;
    for a in &v.atoms {
        sing += ints.f2env.recession(&a.weight);
    }
    for s in &v.singular {
        sing += s.mass * ints.f2env.recession(&s.direction);
    }
    rep.singular_v_term = ints.f1min * sing;
    rep.finalize();
    Ok(rep)
}
