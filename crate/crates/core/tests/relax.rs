use relaxkit::bv1d::{Jump, BV1D};
use relaxkit::measure1d::{Atom, Measure1D};
use relaxkit::mesh::{FaceJump, Grid, MeasureND, MeshField};
use relaxkit::relax::*;
use relaxkit::step::StepFn;

fn ex3() -> Integrands {
    Integrands::example3(1).unwrap()
}

fn f1(z: f64) -> f64 {
    2.0 - (-z * z).exp()
}

/// Brute-force `min_z` on a fine grid, independent of the library minimizers.
fn scan(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|k| lo + step * k as f64)
        .map(|z| (f(z), z))
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
}

#[test]
fn example3_g_is_abs_b() {
    let ints = ex3();
    for a in [-2.0, -1.0, 0.0, 0.5, 1.0, 3.0] {
        for b in -5..=5 {
            let g = g_density(&ints, &[a], &[b as f64]).unwrap();
            assert!((g - (b as f64).abs()).abs() <= 1e-6, "g({a},{b}) = {g}");
        }
    }
}

#[test]
fn g_at_zero_vanishes_for_abs() {
    let ints = ex3();
    assert_eq!(g_density(&ints, &[0.7], &[0.0]).unwrap(), 0.0);
}

#[test]
fn g_with_shifted_doublewell_matches_oracle() {
    // f2** = max(|b|, 1), rec = |b|; oracle: brute-force split on a fine grid
    let ints = Integrands::from_presets("example3_f1", "doublewell_shifted", "area").unwrap();
    for (a, b) in [(1.0, 0.0), (2.0, 3.0), (0.3, -0.5), (0.0, 4.0)] {
        let fa = f1(a);
        let (oracle, _) = scan(
            |b1| fa * b1.abs().max(1.0) + (b - b1).abs(),
            -10.0,
            10.0,
            1e-4,
        );
        let g = g_density(&ints, &[a], &[b]).unwrap();
        assert!((g - oracle).abs() < 1e-6, "a={a} b={b}: {g} vs {oracle}");
    }
}

#[test]
fn reduced_cell_matches_dense_scan() {
    let ints = ex3();
    for b in [1.0, 10.0] {
        let (oracle, zo) = scan(|z| f1(z) * b + 2.0 * (z - 1.0).abs(), -3.0, 3.0, 1e-4);
        let (v, z) = reduced_cell_value(&ints, &[1.0], &[1.0], &[b]).unwrap();
        assert!((v - oracle).abs() < 1e-7, "b={b}: {v} vs {oracle}");
        assert!((z[0] - zo).abs() < 1e-3);
    }
    let (v1, z1) = reduced_cell_value(&ints, &[1.0], &[1.0], &[1.0]).unwrap();
    assert!((v1 - (2.0 - (-1.0f64).exp())).abs() < 1e-12);
    assert_eq!(z1[0], 1.0);
    let (v10, z10) = reduced_cell_value(&ints, &[1.0], &[1.0], &[10.0]).unwrap();
    assert!((v10 - 11.9).abs() < 0.01, "{v10}");
    assert!((z10[0] - 0.1).abs() < 0.01);
}

#[test]
fn reduced_value_is_below_random_profiles() {
    // oracle: any piecewise-linear profile with all the mass placed at one
    // point has energy f1(u(x)) rho(b) + int rho_w(u')
    use rand::{Rng, SeedableRng};
    let ints = ex3();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..200 {
        let am: f64 = rng.gen_range(-2.0..2.0);
        let ap: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(-5.0..5.0);
        let (red, _) = reduced_cell_value(&ints, &[ap], &[am], &[b]).unwrap();
        for _ in 0..20 {
            let k = rng.gen_range(2..10);
            let mut u: Vec<f64> = (0..=k).map(|_| rng.gen_range(-3.0..3.0)).collect();
            u[0] = am;
            u[k] = ap;
            let tv: f64 = u.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            let fmin = u.iter().map(|&z| f1(z)).fold(f64::INFINITY, f64::min);
            let e = fmin * b.abs() + tv;
            assert!(red <= e + 1e-9, "reduced {red} above profile energy {e}");
        }
    }
}

#[test]
fn v_step_all_mass_at_min_node_is_optimal() {
    // brute force over random allocations of b to the nodes
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..500 {
        let c: Vec<f64> = (0..6).map(|_| rng.gen_range(1.0..2.0)).collect();
        let b: f64 = rng.gen_range(-4.0..4.0);
        let cmin = c.iter().copied().fold(f64::INFINITY, f64::min);
        let step = cmin * b.abs();
        let mut w: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let s: f64 = w.iter().sum();
        w[0] += b - s;
        let e: f64 = c.iter().zip(&w).map(|(ci, wi)| ci * wi.abs()).sum();
        assert!(step <= e + 1e-12);
    }
}

#[test]
fn cell_degenerate_cases() {
    let ints = ex3();
    let s = solve_cell_fw0(&ints, &[0.4], &[0.4], &[0.0], 32).unwrap();
    assert_eq!(s.value, 0.0);
    assert_eq!(s.reduced_value, 0.0);
    let s = solve_cell_fw0(&ints, &[2.0], &[-0.5], &[0.0], 32).unwrap();
    assert!((s.value - 2.5).abs() < 1e-6);
    assert!((s.reduced_value - 2.5).abs() < 1e-6);
}

#[test]
fn cell_solution_profile_invariants() {
    let ints = ex3();
    let s = solve_cell_fw0(&ints, &[1.0], &[1.0], &[10.0], 64).unwrap();
    assert!(s.agree, "{} vs {}", s.value, s.reduced_value);
    assert_eq!(s.u_profile[0], vec![1.0]);
    assert_eq!(s.u_profile.last().unwrap(), &vec![1.0]);
    assert_eq!(s.x[0], -1.0);
    assert_eq!(*s.x.last().unwrap(), 1.0);
    assert!((s.mass()[0] - 10.0).abs() < 1e-10);
    // the profile realizes the reported value under the recession integrands
    let mut e = 0.0;
    for w in s.u_profile.windows(2) {
        e += (w[1][0] - w[0][0]).abs();
    }
    for (k, dens) in s.v_profile.iter().enumerate() {
        let (l, r) = (s.v_breaks[k], s.v_breaks[k + 1]);
        if dens[0] != 0.0 {
            e += dens[0].abs() * (r - l) * f1(s.u_at(0.5 * (l + r))[0]);
        }
    }
    assert!((e - s.value).abs() < 1e-9, "{e} vs {}", s.value);
}

#[test]
fn cell_solver_gap_shrinks_with_mesh() {
    let ints = ex3();
    let a = solve_cell_fw0(&ints, &[1.3], &[-0.7], &[3.0], 32).unwrap();
    let b = solve_cell_fw0(&ints, &[1.3], &[-0.7], &[3.0], 64).unwrap();
    assert!(a.value >= a.reduced_value - 1e-9);
    assert!(b.value - b.reduced_value <= a.value - a.reduced_value + 1e-12);
}

#[test]
fn example3_1d_totals() {
    let ints = ex3();
    let u = BV1D::constant(0.0, 1.0, vec![1.0]).unwrap();
    let zero = Measure1D::zero(0.0, 1.0, 1).unwrap();
    let r = evaluate_relaxed_1d(&ints, &u, &zero).unwrap();
    assert!((r.total - 1.0).abs() < 1e-12);
    let d = Measure1D::dirac(0.0, 1.0, 0.5, vec![1.0]).unwrap();
    let r = evaluate_relaxed_1d(&ints, &u, &d).unwrap();
    let want = 1.0 + 2.0 - (-1.0f64).exp();
    assert!((r.total - want).abs() < 1e-9, "{}", r.total);
    assert!(r.sum_defect() <= 1e-12);
}

#[test]
fn classic_bv_jump() {
    let ints = ex3();
    let u = BV1D::new(
        0.0,
        1.0,
        vec![0.0],
        None,
        vec![Jump {
            x: 0.5,
            left: vec![0.0],
            right: vec![1.5],
        }],
        vec![],
    )
    .unwrap();
    let zero = Measure1D::zero(0.0, 1.0, 1).unwrap();
    let r = evaluate_relaxed_1d(&ints, &u, &zero).unwrap();
    assert!((r.total - 2.5).abs() < 1e-9, "{}", r.total);
}

#[test]
fn degenerate_jump_record_is_free() {
    let ints = ex3();
    let u = BV1D::affine(0.0, 1.0, vec![0.2], vec![0.5]).unwrap();
    let v = Measure1D::dirac(0.0, 1.0, 0.3, vec![2.0]).unwrap();
    let base = evaluate_relaxed_1d(&ints, &u, &v).unwrap().total;
    // a zero-weight atom is not admissible, so use a sampled density bump
    // that integrates to zero instead: the totals must stay the same
    let v2 = v
        .sum(
            &Measure1D::from_density(StepFn::uniform(0.0, 1.0, vec![vec![0.0]; 4]).unwrap())
                .unwrap(),
        )
        .unwrap();
    let again = evaluate_relaxed_1d(&ints, &u, &v2).unwrap().total;
    assert!((base - again).abs() < 1e-9);
}

#[test]
fn boundary_atoms_use_free_outer_trace() {
    let ints = ex3();
    let u = BV1D::constant(0.0, 1.0, vec![1.0]).unwrap();
    let v = Measure1D::dirac(0.0, 1.0, 0.0, vec![10.0]).unwrap();
    let r = evaluate_relaxed_1d(&ints, &u, &v).unwrap();
    let (oracle, _) = scan(|y| f1(y) * 10.0 + (1.0 - y).abs(), -4.0, 4.0, 1e-4);
    assert!((r.boundary_left - oracle).abs() < 1e-7);
    assert_eq!(r.boundary_right, 0.0);
}

#[test]
fn cantor_overlap_is_rejected() {
    let ints = ex3();
    let u = relaxkit::bv1d::devils_staircase(0.0, 1.0, 3, 1.0).unwrap();
    let x = u.cantor[2].x;
    let v = Measure1D::dirac(0.0, 1.0, x, vec![1.0]).unwrap();
    assert!(matches!(
        evaluate_relaxed_1d(&ints, &u, &v),
        Err(relaxkit::RelaxError::Representation(_))
    ));
}

#[test]
fn cross_check_runs_the_direct_solver() {
    let ints = ex3();
    let u = BV1D::constant(0.0, 1.0, vec![1.0]).unwrap();
    let v = Measure1D::new(
        0.0,
        1.0,
        1,
        vec![Atom {
            x: 0.5,
            weight: vec![10.0],
        }],
        None,
        vec![],
    )
    .unwrap();
    let opts = EvalOptions {
        cross_check_nodes: Some(64),
        ..Default::default()
    };
    let r = evaluate_relaxed_1d_with(&ints, &u, &v, &opts).unwrap();
    assert!((r.total - 12.9).abs() < 0.01);
}

#[test]
fn example3_2d_total_is_area_plus_one() {
    let ints = Integrands::example3(2).unwrap();
    let grid = Grid::unit_square(8);
    let u = MeshField::constant(grid.clone(), vec![1.0]).unwrap();
    let v = MeasureND::dirac(grid, vec![0.3, 0.6], vec![1.0]).unwrap();
    let r = evaluate_relaxed_nd(&ints, &u, &v).unwrap();
    assert!((r.total - 2.0).abs() < 1e-9, "{}", r.total);
}

#[test]
fn nd_affine_and_face_jumps() {
    let ints = Integrands::example3(2).unwrap();
    let grid = Grid::unit_square(4);
    let u = MeshField::new(
        grid.clone(),
        (0..grid.num_nodes())
            .map(|k| {
                let p = grid.node_point(&grid.node_multi(k));
                vec![0.3 * p[0] - 0.4 * p[1]]
            })
            .collect(),
        vec![FaceJump {
            cell: vec![1, 2],
            axis: 0,
            jump: vec![2.0],
        }],
    )
    .unwrap();
    let v = MeasureND::new(grid, 1, None, vec![], vec![]).unwrap();
    let r = evaluate_relaxed_nd(&ints, &u, &v).unwrap();
    let want = (1.0f64 + 0.25).sqrt() + 2.0 * 0.25;
    assert!((r.total - want).abs() < 1e-9, "{} vs {want}", r.total);
}

#[test]
fn nd_min_f1_density_uses_b1_equals_b() {
    let ints = Integrands::from_presets("example3_f1", "doublewell_shifted", "area2").unwrap();
    let grid = Grid::unit_square(4);
    let u = MeshField::constant(grid.clone(), vec![0.0]).unwrap();
    let v = MeasureND::uniform(grid, vec![0.4]).unwrap();
    let r = evaluate_relaxed_nd(&ints, &u, &v).unwrap();
    assert!((r.g_term - 1.0).abs() < 1e-9, "{}", r.g_term);
}

#[test]
fn nd_rejects_nonconvex_vector_w() {
    let f1 = relaxkit::funclib::preset("example3_f1_2").unwrap();
    let f2 = relaxkit::funclib::preset("abs").unwrap();
    let w = relaxkit::funclib::FunctionModel::closed_form(
        "nc4",
        4,
        relaxkit::funclib::GrowthConstants {
            lower: 1.0,
            upper: 2.0,
        },
        |x| relaxkit::vecops::norm(x).max(1.0),
    )
    .with_envelope(|x| relaxkit::vecops::norm(x).max(1.0))
    .with_recession(relaxkit::vecops::norm);
    let ints = Integrands::new(f1, f2, w).unwrap();
    let grid = Grid::unit_square(2);
    let u = MeshField::constant(grid.clone(), vec![0.0, 0.0]).unwrap();
    let v = MeasureND::new(grid, 1, None, vec![], vec![]).unwrap();
    assert!(matches!(
        evaluate_relaxed_nd(&ints, &u, &v),
        Err(relaxkit::RelaxError::Unsupported(_))
    ));
}

#[test]
fn theta_counts_all_three_parts() {
    let u = BV1D::affine(0.0, 1.0, vec![0.0], vec![2.0]).unwrap();
    let v = Measure1D::dirac(0.0, 1.0, 0.5, vec![-3.0]).unwrap();
    let t = theta_measure(&u, &v, 0.25, 0.75);
    assert!((t - (0.5 + 3.0 + 1.0)).abs() < 1e-12);
}
