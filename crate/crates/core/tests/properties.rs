use proptest::prelude::*;
use relaxkit::bv1d::BV1D;
use relaxkit::funclib::{convex_envelope, preset, EnvelopeOptions, EnvelopeTable, FunctionModel};
use relaxkit::measure1d::{Atom, Measure1D};
use relaxkit::relax::{evaluate_relaxed_1d, g_density, Integrands};
use relaxkit::step::StepFn;
use std::sync::OnceLock;

const F2: [&str; 5] = [
    "abs",
    "area",
    "maxabs1",
    "tilted_area",
    "doublewell_shifted",
];

fn envelopes() -> &'static Vec<(FunctionModel, EnvelopeTable)> {
    static CELL: OnceLock<Vec<(FunctionModel, EnvelopeTable)>> = OnceLock::new();
    CELL.get_or_init(|| {
        F2.iter()
            .map(|n| {
                let f = preset(n).unwrap();
                let env = convex_envelope(&f, &EnvelopeOptions::default()).unwrap();
                (f, env)
            })
            .collect()
    })
}

fn integrands() -> &'static Vec<Integrands> {
    static CELL: OnceLock<Vec<Integrands>> = OnceLock::new();
    CELL.get_or_init(|| {
        [
            ("example3_f1", "abs", "area"),
            ("bump_f1", "maxabs1", "tilted_area"),
            ("cos_f1", "doublewell_shifted", "area"),
        ]
        .iter()
        .map(|(a, b, c)| Integrands::from_presets(a, b, c).unwrap())
        .collect()
    })
}

fn measure() -> impl Strategy<Value = Measure1D> {
    (
        prop::collection::vec(-3.0..3.0f64, 1..6),
        prop::collection::vec((0.0..=1.0f64, -2.0..2.0f64), 0..4),
    )
        .prop_map(|(vals, atoms)| {
            let n = vals.len();
            let breaks: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let ac = StepFn::new(breaks, vals.into_iter().map(|v| vec![v]).collect()).unwrap();
            let atoms = atoms
                .into_iter()
                .map(|(x, w)| Atom { x, weight: vec![w] })
                .collect();
            Measure1D::from_density(ac)
                .unwrap()
                .with_atoms(atoms)
                .unwrap()
        })
}

fn bv() -> impl Strategy<Value = BV1D> {
    (
        -2.0..2.0f64,
        prop::collection::vec(-3.0..3.0f64, 1..5),
        prop::collection::vec((0.05..0.95f64, -2.0..2.0f64), 0..3),
    )
        .prop_map(|(a, slopes, jumps)| {
            let n = slopes.len();
            let breaks: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let slope = StepFn::new(breaks, slopes.into_iter().map(|s| vec![s]).collect()).unwrap();
            let jumps = jumps.into_iter().map(|(x, h)| (x, vec![h])).collect();
            BV1D::from_increments(0.0, 1.0, vec![a], Some(slope), jumps, Vec::new()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn envelope_is_below_and_convex(k in 0usize..5, x in -7.0..7.0f64, y in -7.0..7.0f64, t in 0.0..=1.0f64) {
        let (f, env) = &envelopes()[k];
        prop_assert!(env.eval(&[x]) <= f.eval(&[x]) + 1e-9);
        let mid = env.eval(&[t * x + (1.0 - t) * y]);
        prop_assert!(mid <= t * env.eval(&[x]) + (1.0 - t) * env.eval(&[y]) + 1e-9);
    }

    #[test]
    fn recession_is_positively_homogeneous(k in 0usize..5, b in -5.0..5.0f64, s in 0.1..10.0f64) {
        let env = &envelopes()[k].1;
        let (r1, r2) = (env.recession(&[s * b]), s * env.recession(&[b]));
        prop_assert!((r1 - r2).abs() <= 1e-6 * r2.abs().max(1.0));
        prop_assert!(env.recession(&[b]) >= 0.0);
    }

    #[test]
    fn g_is_sandwiched(k in 0usize..3, a in -3.0..3.0f64, b in -6.0..6.0f64) {
        let ints = &integrands()[k];
        let g = g_density(ints, &[a], &[b]).unwrap();
        prop_assert!(g <= ints.f1_at(&[a]) * ints.f2env.eval(&[b]) + 1e-9);
        prop_assert!(g >= ints.f1min * ints.f2env.eval(&[b]) - 1e-9);
    }

    #[test]
    fn g_is_convex_in_b(k in 0usize..3, a in -3.0..3.0f64, b in -6.0..6.0f64, c in -6.0..6.0f64) {
        let ints = &integrands()[k];
        let g = |x: f64| g_density(ints, &[a], &[x]).unwrap();
        prop_assert!(g(0.5 * (b + c)) <= 0.5 * (g(b) + g(c)) + 1e-7);
    }

    #[test]
    fn measure_sum_adds_totals(v in measure(), c in -2.0..2.0f64, atoms in prop::collection::vec((0.0..=1.0f64, -2.0..2.0f64), 0..3)) {
        // densities must share a mesh
        let atoms = atoms.into_iter().map(|(x, w)| Atom { x, weight: vec![w] }).collect();
        let w = v.scaled(c).unwrap().with_atoms(atoms).unwrap();
        let s = v.sum(&w).unwrap();
        prop_assert!((s.total()[0] - v.total()[0] - w.total()[0]).abs() < 1e-12);
        prop_assert!(s.total_variation() <= v.total_variation() + w.total_variation() + 1e-12);
    }

    #[test]
    fn pairing_is_linear(v in measure(), p in -2.0..2.0f64, q in -2.0..2.0f64) {
        let lhs = v.pair(|x| p + q * x)[0];
        let rhs = p * v.pair(|_| 1.0)[0] + q * v.pair(|x| x)[0];
        prop_assert!((lhs - rhs).abs() < 1e-9);
        prop_assert!((v.pair(|_| 1.0)[0] - v.total()[0]).abs() < 1e-12);
    }

    #[test]
    fn derivative_mass_is_total_increment(u in bv()) {
        let du = u.derivative();
        let inc = u.trace(1.0, relaxkit::bv1d::Side::Left).unwrap()[0] - u.trace(0.0, relaxkit::bv1d::Side::Right).unwrap()[0];
        prop_assert!((du.total()[0] - inc).abs() < 1e-9);
        prop_assert!((du.total_variation() - u.total_variation()).abs() < 1e-9);
    }

    #[test]
    fn energy_terms_add_up(k in 0usize..3, u in bv(), v in measure()) {
        let r = evaluate_relaxed_1d(&integrands()[k], &u, &v).unwrap();
        prop_assert!(r.sum_defect() <= 1e-12);
        prop_assert!(r.total.is_finite());
    }
}
