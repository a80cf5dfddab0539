use proptest::prelude::*;

use blowup::evolve::{barrier_check, evolve_radial, Clause, EvolveConfig, InitialData};
use blowup::heat::{HeatParams, LambdaRoots};
use blowup::phase::{barrier_bound, to_torus, SteadyParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ordered_data_stays_ordered(n in 3.0f64..7.0, a in 0.5f64..4.0, gap in 0.0f64..2.0) {
        let run = |amp: f64| {
            let mut c = EvolveConfig::new(n, 4.0, 256, InitialData::Bump { amplitude: amp, radius: 1.0 }, 5e-4);
            c.dt_max = Some(1e-6);
            c.snapshots.growth_factor = None;
            evolve_radial(&c).unwrap()
        };
        let (lo, hi) = (run(a), run(a + gap));
        prop_assert_eq!(lo.series.len(), hi.series.len());
        for (x, y) in lo.series.iter().zip(&hi.series) {
            prop_assert!(x.v_max <= y.v_max + 1e-8);
        }
    }
}

proptest! {
    #[test]
    fn lambda_roots_solve_quadratic(n in 3.0f64..30.0, sigma in 0.05f64..5.0) {
        prop_assume!(n - 2.0 - 1.0 / sigma > 0.0);
        let p = HeatParams::new(n, sigma, 1.0).unwrap();
        let (a, b) = (p.a_coef(), p.b_coef());
        if let LambdaRoots::Real { lambda1, lambda2 } = p.lambda_roots() {
            let scale = 1.0 + a.abs() + b.abs();
            for l in [lambda1, lambda2] {
                prop_assert!((l * l + a * l + b).abs() <= 1e-10 * scale * (1.0 + l * l));
            }
            prop_assert!(lambda1 >= lambda2);
        }
    }

    #[test]
    fn minus_four_on_lepin_boundary(sigma in 0.05f64..10.0) {
        let p = HeatParams::new(10.0 + 3.0 / sigma, sigma, 1.0).unwrap();
        match p.lambda_roots() {
            LambdaRoots::Real { lambda1, .. } => prop_assert!((lambda1 + 4.0).abs() <= 1e-10 * (1.0 + 1.0 / sigma)),
            LambdaRoots::Complex { .. } => prop_assert!(false),
        }
    }

    #[test]
    fn torus_chart_inverts(w in -1e6f64..1e6, wp in -1e6f64..1e6) {
        let (phi, psi) = to_torus(w, wp);
        let w2 = phi.tan();
        let wp2 = psi.tan() * (1.0 + w2 * w2);
        prop_assert!((w2 - w).abs() <= 1e-9 * (1.0 + w.abs()));
        prop_assert!((wp2 - wp).abs() <= 1e-8 * (1.0 + wp.abs() + w * w));
    }

    #[test]
    fn clause_three_is_gamma_below_one(c in 0.1f64..12.0) {
        let cfg = EvolveConfig::new(5.0, 40.0, 512, InitialData::Decay { c, exponent: 2.0 }, 1.0);
        let v = barrier_check(&cfg).unwrap();
        let gamma = c / 6.0;
        prop_assert!((v.constant - gamma).abs() <= 1e-12 * gamma);
        prop_assert_eq!(v.clause == Some(Clause::III), gamma < 1.0);
    }

    #[test]
    fn low_dimensional_barrier_decreases(n in 2.1f64..3.9, r in 0.0f64..1e3, dr in 1e-3f64..10.0, c in 0.1f64..10.0) {
        let p = SteadyParams::new(n).unwrap();
        prop_assert!(barrier_bound(&p, r + dr, c, 1.0) < barrier_bound(&p, r, c, 1.0));
    }
}
