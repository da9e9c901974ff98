//! Derivative-free global search over small boxes of R^m (m <= 2).

/// Grid points per axis of the coarse scan.
const GRID_1D: usize = 4001;
const GRID_2D: usize = 121;

/// Minimizes `f` over the box `center + [-radius, radius]^m`.
///
/// The scan evaluates a uniform grid plus the `extra` candidates, keeps the
/// first minimizer in scan order (extra candidates first), then polishes it
/// locally. The polish only accepts strict improvements.
pub fn minimize_in_box<F: Fn(&[f64]) -> f64>(
    f: F,
    center: &[f64],
    radius: f64,
    extra: &[Vec<f64>],
) -> (f64, Vec<f64>) {
    let m = center.len();
    let n = if m == 1 { GRID_1D } else { GRID_2D };
    minimize_with_grid(f, center, radius, extra, n)
}

/// As [`minimize_in_box`] with an explicit grid size per axis.
pub fn minimize_with_grid<F: Fn(&[f64]) -> f64>(
    f: F,
    center: &[f64],
    radius: f64,
    extra: &[Vec<f64>],
    n: usize,
) -> (f64, Vec<f64>) {
    let m = center.len();
    let mut best_v = f64::INFINITY;
    let mut best = center.to_vec();
    for z in extra {
        let v = f(z);
        if v < best_v {
            best_v = v;
            best = z.clone();
        }
    }
    let h = 2.0 * radius / (n - 1) as f64;
    let total = n.pow(m as u32);
    let mut p = vec![0.0; m];
    for k in 0..total {
        let mut idx = k;
        for a in 0..m {
            p[a] = center[a] - radius + h * (idx % n) as f64;
            idx /= n;
        }
        let v = f(&p);
        if v < best_v {
            best_v = v;
            best.copy_from_slice(&p);
        }
    }
    polish(&f, best_v, best, h)
}

/// Local refinement around `x` on a shrinking pattern, starting at step `h`.
pub fn polish<F: Fn(&[f64]) -> f64>(f: &F, mut v: f64, mut x: Vec<f64>, h: f64) -> (f64, Vec<f64>) {
    let m = x.len();
    if m == 1 {
        // golden section on [x - h, x + h], accepting only improvements
        let (mut a, mut b) = (x[0] - h, x[0] + h);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let mut fc = f(&[c]);
        let mut fd = f(&[d]);
        for _ in 0..80 {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(&[c]);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(&[d]);
            }
        }
        for (cand, fv) in [(c, fc), (d, fd)] {
            if fv < v {
                v = fv;
                x[0] = cand;
            }
        }
        return (v, x);
    }
    let mut step = h;
    let mut trial = x.clone();
    while step > 1e-13 * (1.0 + x.iter().fold(0.0f64, |s, t| s.max(t.abs()))) {
        let mut moved = false;
        for a in 0..m {
            for s in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[a] += s * step;
                let fv = f(&trial);
                if fv < v {
                    v = fv;
                    x.copy_from_slice(&trial);
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (v, x)
}
