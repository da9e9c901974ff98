use proptest::prelude::*;
use relaxkit::bv1d::BV1D;
use relaxkit::measure1d::{Atom, Measure1D};
use relaxkit::mesh::{Grid, MeasureND, MeshField};
use relaxkit::relax::*;
use relaxkit::sequences::*;
use relaxkit::step::{uniform_breaks, StepFn};

fn f1(z: f64) -> f64 {
    2.0 - (-z * z).exp()
}

fn ex3_1d() -> Integrands {
    Integrands::example3(1).unwrap()
}

fn ex3_2d() -> Integrands {
    Integrands::example3(2).unwrap()
}

fn nd_params(k: usize) -> Params {
    Params::new(
        k,
        2f64.powi(-(1i32 << (k + 2))),
        2f64.powi(-(k as i32)),
        2f64.powi(-(k as i32 + 1)),
    )
}

fn line_params(k: usize) -> Params {
    Params::new(k, 2f64.powi(-(k as i32)), 0.0, 0.0)
}

#[test]
fn concentrate_1d_keeps_cell_masses() {
    let dens = StepFn::uniform_from_fn(0.0, 2.0, 8, |x| vec![1.0 + x, -x]).unwrap();
    let sigma = Measure1D::from_density(dens.clone()).unwrap();
    for eps in [0.5, 0.1, 1e-3] {
        let c = concentrate_measure_1d(&sigma, eps, 4).unwrap();
        for k in 0..4 {
            let (a, b) = (0.5 * k as f64, 0.5 * (k + 1) as f64);
            let want = dens.integral_over(a, b);
            let got = c.integral_over(a, b);
            for i in 0..2 {
                assert!((got[i] - want[i]).abs() < 1e-12);
            }
        }
        assert!((c.support_measure() - 2.0 * eps).abs() < 1e-12);
    }
    let with_atom = sigma
        .with_atoms(vec![Atom {
            x: 1.0,
            weight: vec![1.0, 0.0],
        }])
        .unwrap();
    assert!(concentrate_measure_1d(&with_atom, 0.1, 4).is_err());
}

#[test]
fn concentrate_nd_keeps_mass_and_shrinks() {
    let g = Grid::unit_square(8);
    let sigma = MeasureND::uniform(g, vec![3.0]).unwrap();
    for eps in [0.1, 0.01] {
        let s = concentrate_measure_nd(&sigma, eps, 4).unwrap();
        assert!((s.total()[0] - 3.0).abs() < 1e-12);
        assert_eq!(s.spikes.len(), 16);
        assert!((s.support_measure() - eps).abs() < 1e-12);
    }
    assert!(concentrate_measure_nd(&sigma, 0.1, 3).is_err());
    assert!(concentrate_measure_nd(&sigma, 0.9, 4).is_err());
}

#[test]
fn interpolation_1d_properties() {
    let dens = StepFn::new(vec![0.0, 0.3, 1.0], vec![vec![2.0], vec![-1.0]]).unwrap();
    let v = Measure1D::from_density(dens)
        .unwrap()
        .with_atoms(vec![
            Atom {
                x: 1.0,
                weight: vec![0.5],
            },
            Atom {
                x: 0.4,
                weight: vec![-0.25],
            },
        ])
        .unwrap();
    let tv = v.total_variation();
    for j in 0..8 {
        let s = interpolate_ij_1d(&v, j).unwrap();
        // atom at the right end is kept
        assert!((s.integral()[0] - v.total()[0]).abs() < 1e-12, "j={j}");
        assert!(s.abs_integral() <= tv + 1e-12);
        // averages of averages are unchanged
        let again = interpolate_ij_1d(&Measure1D::from_density(s.clone()).unwrap(), j).unwrap();
        for (a, b) in again.values().iter().zip(s.values()) {
            assert!((a[0] - b[0]).abs() < 1e-12);
        }
    }
    // cells inside one piece keep the exact value
    let s = interpolate_ij_1d(
        &Measure1D::from_density(StepFn::constant(0.0, 1.0, vec![0.1]).unwrap()).unwrap(),
        5,
    )
    .unwrap();
    assert!(s.values().iter().all(|x| x[0] == 0.1));
}

#[test]
fn interpolation_nd_properties() {
    let g = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![6, 6]).unwrap();
    let ac: Vec<Vec<f64>> = (0..36).map(|c| vec![(c % 5) as f64 - 2.0]).collect();
    let v = MeasureND::new(
        g.clone(),
        1,
        Some(ac),
        vec![relaxkit::mesh::PointMass {
            x: vec![1.0, 1.0],
            weight: vec![2.0],
        }],
        Vec::new(),
    )
    .unwrap();
    for j in 1..5 {
        let w = interpolate_ij_nd(&v, j).unwrap();
        assert!((w.total()[0] - v.total()[0]).abs() < 1e-12);
        assert!(w.total_variation() <= v.total_variation() + 1e-12);
        let again = interpolate_ij_nd(&w, j).unwrap();
        assert_eq!(again.ac, w.ac);
    }
    let off = MeasureND::uniform(
        Grid::new(vec![0.1, 0.0], vec![1.0, 1.0], vec![2, 2]).unwrap(),
        vec![1.0],
    )
    .unwrap();
    assert!(interpolate_ij_nd(&off, 2).is_err());
}

#[test]
fn decomposition_of_growing_indicators() {
    // z_k = k 1_(0, 1/k): {|z_k| > 1} already has measure 1/k, so the level
    // is 1 and the concentrating part is (k - 1) 1_(0, 1/k)
    let z: Vec<StepFn> = (1..=40)
        .map(|k| {
            let k = k as f64;
            if k == 1.0 {
                StepFn::constant(0.0, 1.0, vec![1.0]).unwrap()
            } else {
                StepFn::new(vec![0.0, 1.0 / k, 1.0], vec![vec![k], vec![0.0]]).unwrap()
            }
        })
        .collect();
    let split = decompose_osc_conc(&z, 1.0 + 1e-12).unwrap();
    for (i, s) in split.iter().enumerate() {
        let k = (i + 1) as f64;
        assert_eq!(s.level, 1.0);
        assert!(s.conc_support <= 1.0 / k + 1e-15);
        let want = (k - 1.0) / k;
        assert!((s.conc_mass - want).abs() < 1e-12, "k={k}");
        let sum = s.osc.add(&s.conc).unwrap();
        for (a, b) in sum.pieces().zip(z[i].pieces()) {
            assert!((a.2[0] - b.2[0]).abs() < 1e-12);
        }
        assert!(s.osc.values().iter().all(|v| v[0].abs() <= s.level));
    }
    // the split is exact for |.|
    let abs = |v: &[f64]| v[0].abs();
    assert!(splitting_defect(&abs, &z[9], &split[9]) < 1e-12);
    assert!(decompose_osc_conc(&z, 0.5).is_err());
}

#[test]
fn jump_recovery_approaches_cell_value_from_below() {
    let ints = ex3_1d();
    let u = BV1D::constant(0.0, 1.0, vec![1.0]).unwrap();
    let v = Measure1D::dirac(0.0, 1.0, 0.5, vec![10.0]).unwrap();
    let total = evaluate_relaxed_1d(&ints, &u, &v).unwrap().total;
    // independent value of the reduced cell: 1 + min_z f1(z) 10 + 2|z - 1|
    let oracle = 1.0
        + (0..=60000)
            .map(|i| -3.0 + 1e-4 * i as f64)
            .map(|z| 10.0 * f1(z) + 2.0 * (z - 1.0).abs())
            .fold(f64::INFINITY, f64::min);
    assert!((total - oracle).abs() < 1e-6);
    let cell = solve_cell_fw0(&ints, &[1.0], &[1.0], &[10.0], 201).unwrap();
    let mut prev = f64::INFINITY;
    for k in 3..=8 {
        let p = line_params(k);
        let pair = build_recovery_1d_jump(&ints, &u, &v, 0.5, p.epsilon, &cell, p).unwrap();
        let d = (pair.energy - total).abs();
        assert!(pair.energy <= total + 1e-9, "k={k}: {}", pair.energy);
        assert!(d <= prev, "k={k}: {d} after {prev}");
        assert!(d <= 4.0 * p.epsilon);
        assert!((pair.mass() - 10.0).abs() < 1e-9);
        prev = d;
    }
    assert!(prev < 1e-4, "{prev}");
}

#[test]
fn jump_recovery_rejects_wrong_cells() {
    let ints = ex3_1d();
    let u = BV1D::constant(0.0, 1.0, vec![1.0]).unwrap();
    let v = Measure1D::dirac(0.0, 1.0, 0.5, vec![10.0]).unwrap();
    let cell = solve_cell_fw0(&ints, &[1.0], &[1.0], &[9.0], 101).unwrap();
    assert!(build_recovery_1d_jump(&ints, &u, &v, 0.5, 0.1, &cell, line_params(3)).is_err());
    let cell = solve_cell_fw0(&ints, &[1.0], &[1.0], &[10.0], 101).unwrap();
    assert!(build_recovery_1d_jump(&ints, &u, &v, 0.5, 0.6, &cell, line_params(3)).is_err());
}

#[test]
fn full_recovery_with_jump_atom_and_boundary() {
    let ints = ex3_1d();
    let u = BV1D::new(
        0.0,
        1.0,
        vec![0.5],
        Some(StepFn::constant(0.0, 1.0, vec![0.5]).unwrap()),
        vec![relaxkit::bv1d::Jump {
            x: 0.25,
            left: vec![0.625],
            right: vec![-0.5],
        }],
        Vec::new(),
    )
    .unwrap();
    let v = Measure1D::from_density(StepFn::constant(0.0, 1.0, vec![1.0]).unwrap())
        .unwrap()
        .with_atoms(vec![
            Atom {
                x: 0.25,
                weight: vec![2.0],
            },
            Atom {
                x: 0.75,
                weight: vec![-1.0],
            },
            Atom {
                x: 1.0,
                weight: vec![3.0],
            },
        ])
        .unwrap();
    let total = evaluate_relaxed_1d(&ints, &u, &v).unwrap().total;
    let mut prev = f64::INFINITY;
    for k in 4..=8 {
        let p = line_params(k);
        let pair = build_recovery_1d(&ints, &u, &v, p.epsilon, 201, p).unwrap();
        let d = (pair.energy - total).abs();
        assert!(d <= prev + 1e-9, "k={k}: {} vs {total}", pair.energy);
        prev = d;
    }
    assert!(prev <= 0.02 * total, "{prev}");
}

#[test]
fn spike_recovery_for_example3_in_2d() {
    let ints = ex3_2d();
    let g = Grid::unit_square(16);
    let u = MeshField::constant(g.clone(), vec![1.0]).unwrap();
    let v = MeasureND::dirac(g, vec![0.5, 0.5], vec![1.0]).unwrap();
    let total = evaluate_relaxed_nd(&ints, &u, &v).unwrap().total;
    assert!((total - 2.0).abs() < 1e-9);
    let mut energies = Vec::new();
    for k in 1..=6 {
        let (pair, info) = build_recovery_nd(&ints, &u, &v, nd_params(k)).unwrap();
        assert_eq!(info.spikes, 1);
        assert!((pair.mass() - 1.0).abs() < 1e-9);
        energies.push(pair.energy);
    }
    assert!(energies.windows(2).all(|w| w[1] <= w[0]), "{energies:?}");
    assert!(energies[0] > 2.3 && energies[0] < 2.6, "{}", energies[0]);
    assert!((energies[5] - 2.0).abs() < 1e-3, "{}", energies[5]);
}

#[test]
fn spike_energy_matches_radial_formula() {
    // u = 1, one spike of mass 1 at the center, cut-off of radius rho:
    // E = 1 + f1(0) + int_{B_rho} sqrt(1 + |grad h|^2) - 1, the radial
    // integral done here with a plain midpoint rule in ln r
    let ints = ex3_2d();
    let g = Grid::unit_square(16);
    let u = MeshField::constant(g.clone(), vec![1.0]).unwrap();
    let v = MeasureND::dirac(g, vec![0.5, 0.5], vec![1.0]).unwrap();
    let p = nd_params(1);
    let (pair, _) = build_recovery_nd(&ints, &u, &v, p).unwrap();
    let SeqU::Mesh(field) = &pair.u else { panic!() };
    let d = &field.disks[0];
    let (rho, s) = (d.rho, d.s);
    let (a, b) = ((rho * inner_ratio(s)).ln(), rho.ln());
    let n = 200000;
    let mut extra = 0.0;
    for i in 0..n {
        let t = a + (b - a) * (i as f64 + 0.5) / n as f64;
        let r = t.exp();
        let dh = cutoff_phi_s_prime(s, r / rho) / rho;
        extra += ((1.0 + dh * dh).sqrt() - 1.0) * 2.0 * std::f64::consts::PI * r * r * (b - a)
            / n as f64;
    }
    // W(0) on the square, f1(u_min) |mass| from the spike
    let oracle = 1.0 + f1(0.0) + extra;
    assert!(
        (pair.energy - oracle).abs() < 1e-3,
        "{} vs {oracle}",
        pair.energy
    );
}

#[test]
fn zero_measure_needs_no_spikes() {
    let ints = ex3_2d();
    let g = Grid::unit_square(8);
    let u = MeshField::from_fn(g.clone(), |x| vec![x[0] - 0.5 * x[1]]).unwrap();
    let v = MeasureND::new(g, 1, None, Vec::new(), Vec::new()).unwrap();
    let total = evaluate_relaxed_nd(&ints, &u, &v).unwrap().total;
    assert!((total - 1.5).abs() < 1e-9);
    for k in 1..=3 {
        let (pair, info) = build_recovery_nd(&ints, &u, &v, nd_params(k)).unwrap();
        assert_eq!(info.spikes, 0);
        assert!((pair.energy - total).abs() < 1e-9);
    }
}

#[test]
fn field_at_f1_minimizer_needs_no_cut_off_energy() {
    // u = 0 already minimizes f1, so the cut-off changes nothing
    let ints = ex3_2d();
    let g = Grid::unit_square(8);
    let u = MeshField::constant(g.clone(), vec![0.0]).unwrap();
    let v = MeasureND::dirac(g, vec![0.25, 0.5], vec![2.0]).unwrap();
    let total = evaluate_relaxed_nd(&ints, &u, &v).unwrap().total;
    assert!((total - 3.0).abs() < 1e-9);
    for k in 1..=4 {
        let (pair, _) = build_recovery_nd(&ints, &u, &v, nd_params(k)).unwrap();
        assert!((pair.energy - total).abs() < 1e-9, "k={k}: {}", pair.energy);
    }
}

#[test]
fn mollified_sequences_miss_the_relaxed_value() {
    let ints = ex3_1d();
    let u = BV1D::constant(0.0, 1.0, vec![1.0]).unwrap();
    let v = Measure1D::dirac(0.0, 1.0, 0.5, vec![10.0]).unwrap();
    let total = evaluate_relaxed_1d(&ints, &u, &v).unwrap().total;
    // u stays at 1, so the energy is 1 + 10 f1(1) for every width
    let oracle = 1.0 + 10.0 * f1(1.0);
    for kernel in Kernel::ALL {
        for k in 3..=8 {
            let p = line_params(k);
            let m = mollify_1d(&ints, &u, &v, p.epsilon, kernel, p).unwrap();
            assert!((m.energy - oracle).abs() < 1e-9);
            assert!(m.energy > total + 4.0);
        }
    }
    let ints = ex3_2d();
    let g = Grid::unit_square(16);
    let u = MeshField::constant(g.clone(), vec![1.0]).unwrap();
    let v = MeasureND::dirac(g, vec![0.5, 0.5], vec![1.0]).unwrap();
    for j in 4..=7 {
        let m = mollify_nd(&ints, &u, &v, j, Kernel::Tent, line_params(j as usize)).unwrap();
        assert!((m.energy - (1.0 + f1(1.0))).abs() < 1e-9);
        assert!((m.mass() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mollified_jump_becomes_a_ramp() {
    let ints = ex3_1d();
    let u = BV1D::new(
        0.0,
        1.0,
        vec![0.0],
        None,
        vec![relaxkit::bv1d::Jump {
            x: 0.5,
            left: vec![0.0],
            right: vec![1.0],
        }],
        Vec::new(),
    )
    .unwrap();
    let v = Measure1D::zero(0.0, 1.0, 1).unwrap();
    let w = 0.05;
    let m = mollify_1d(&ints, &u, &v, w, Kernel::Box, line_params(1)).unwrap();
    // slope 1/(2w) on a width 2w ramp
    let oracle = 1.0 - 2.0 * w + 2.0 * w * (1.0 + 1.0 / (4.0 * w * w)).sqrt();
    assert!((m.energy - oracle).abs() < 1e-9);
}

#[test]
fn detector_separates_spikes_from_oscillation() {
    let ints = ex3_2d();
    let g = Grid::unit_square(16);
    let u = MeshField::constant(g.clone(), vec![1.0]).unwrap();
    let v = MeasureND::dirac(g.clone(), vec![0.5, 0.5], vec![1.0]).unwrap();
    let spikes: Vec<_> = (1..=4)
        .map(|k| build_recovery_nd(&ints, &u, &v, nd_params(k)).unwrap().0)
        .collect();
    let th = DetectorThresholds::default();
    assert!(concentration_detector(&spikes, &th).unwrap().concentrating);

    let ints1 = ex3_1d();
    let u1 = BV1D::constant(0.0, 1.0, vec![1.0]).unwrap();
    let osc: Vec<_> = (1..=6)
        .map(|k| {
            let n = 1usize << (k + 2);
            let dens =
                StepFn::uniform_from_fn(0.0, 1.0, n, |x| vec![1.0 + (n as f64 * x).sin()]).unwrap();
            SequencePair::line(&ints1, line_params(k), u1.clone(), dens).unwrap()
        })
        .collect();
    assert!(!concentration_detector(&osc, &th).unwrap().concentrating);

    // growing indicators concentrate; the mass of the large part stays 1
    let ind: Vec<_> = (2..=7)
        .map(|k| {
            let k2 = (1u32 << (2 * k)) as f64;
            let dens = StepFn::new(
                vec![0.0, 0.5, 0.5 + 1.0 / k2, 1.0],
                vec![vec![0.0], vec![k2], vec![0.0]],
            )
            .unwrap();
            SequencePair::line(&ints1, line_params(k), u1.clone(), dens).unwrap()
        })
        .collect();
    let r = concentration_detector(&ind, &th).unwrap();
    assert!(r.concentrating, "{r:?}");
    assert!(r.masses.iter().all(|m| (m - 1.0).abs() < 1e-12));
    assert!(concentration_detector(&[], &th).is_err());
}

#[test]
fn probe_accepts_recovery_and_rejects_mollification() {
    let ints = ex3_1d();
    let u = BV1D::constant(0.0, 1.0, vec![1.0]).unwrap();
    let v = Measure1D::dirac(0.0, 1.0, 0.5, vec![10.0]).unwrap();
    let target = Target::Line(u.clone(), v.clone());
    let cell = solve_cell_fw0(&ints, &[1.0], &[1.0], &[10.0], 201).unwrap();
    let schedule: Vec<Params> = (3..=8).map(line_params).collect();
    let opts = ProbeOptions::default();
    let rec = |p: Params| build_recovery_1d_jump(&ints, &u, &v, 0.5, p.epsilon, &cell, p);
    let report = gamma_probe(&ints, &target, &rec, &schedule, &opts).unwrap();
    assert!(report.pass && report.weak_ok, "{report:?}");
    let moll = |p: Params| mollify_1d(&ints, &u, &v, p.epsilon, Kernel::Tent, p);
    let report = gamma_probe(&ints, &target, &moll, &schedule, &opts).unwrap();
    assert!(report.weak_ok && !report.pass);
    assert!(report.liminf_estimate >= report.relaxed_value);

    let csv = report.to_csv().unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "k,epsilon,delta,eta,energy,relaxed_value,gap,support_measure,mass"
    );
    assert_eq!(lines.len(), schedule.len() + 1);
    let svg = report.to_svg();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
}

#[test]
fn probe_accepts_2d_spikes() {
    let ints = ex3_2d();
    let g = Grid::unit_square(16);
    let u = MeshField::constant(g.clone(), vec![1.0]).unwrap();
    let v = MeasureND::dirac(g, vec![0.5, 0.5], vec![1.0]).unwrap();
    let target = Target::Mesh(u.clone(), v.clone());
    let schedule: Vec<Params> = (1..=6).map(nd_params).collect();
    let rec = |p: Params| build_recovery_nd(&ints, &u, &v, p).map(|r| r.0);
    let report = gamma_probe(&ints, &target, &rec, &schedule, &ProbeOptions::default()).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn envelope_energy_is_below_original() {
    let ints = Integrands::from_presets("example3_f1", "doublewell_shifted", "area").unwrap();
    let u = BV1D::affine(0.0, 1.0, vec![-0.5], vec![1.0]).unwrap();
    for seed in 0..20u64 {
        let dens = StepFn::uniform_from_fn(0.0, 1.0, 32, |x| {
            vec![((x * 37.0 + seed as f64) * 1.7).sin() * 2.0]
        })
        .unwrap();
        let pair = SequencePair::line(&ints, line_params(1), u.clone(), dens).unwrap();
        assert!(pair.envelope_energy(&ints).unwrap() <= pair.energy + 1e-12);
    }
}

#[test]
fn battery_starts_with_constant() {
    let b = TestBattery::new(3, vec![0.0, 0.0], vec![1.0, 2.0]);
    assert_eq!(b.len(), 16);
    assert_eq!(b.eval(0, &[0.3, 0.7]), 1.0);
    let c = TestBattery::new(3, vec![0.0, 0.0], vec![1.0, 2.0]);
    for i in 0..16 {
        assert_eq!(b.eval(i, &[0.2, 1.1]), c.eval(i, &[0.2, 1.1]));
        assert!(b.eval(i, &[0.2, 1.1]).abs() <= 1.0);
    }
}

proptest! {
    #[test]
    fn concentration_preserves_total(vals in prop::collection::vec(-5.0f64..5.0, 1..12), eps in 1e-4f64..0.9, cells in 1usize..6) {
        let n = vals.len();
        let dens = StepFn::new(uniform_breaks(0.0, 1.0, vals.len()), vals.into_iter().map(|x| vec![x]).collect()).unwrap();
        let sigma = Measure1D::from_density(dens.clone()).unwrap();
        let c = concentrate_measure_1d(&sigma, eps, cells).unwrap();
        prop_assert!((c.integral()[0] - dens.integral()[0]).abs() < 1e-9 * (1.0 + n as f64));
        prop_assert!(c.support_measure() <= eps + 1e-12);
    }

    #[test]
    fn interpolation_contracts(vals in prop::collection::vec(-5.0f64..5.0, 1..12), x in 0.0f64..=1.0, w in -3.0f64..3.0, j in 0u32..7) {
        let dens = StepFn::new(uniform_breaks(0.0, 1.0, vals.len()), vals.into_iter().map(|x| vec![x]).collect()).unwrap();
        let v = Measure1D::from_density(dens).unwrap().with_atoms(vec![Atom { x, weight: vec![w] }]).unwrap();
        let s = interpolate_ij_1d(&v, j).unwrap();
        prop_assert!(s.abs_integral() <= v.total_variation() + 1e-9);
        prop_assert!((s.integral()[0] - v.total()[0]).abs() < 1e-9);
    }
}
