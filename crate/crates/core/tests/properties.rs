use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use smirnov::experiments::{run_rate_sweep, RateConfig, ReferenceChoice};
use smirnov::extremal::ExtremalProblem;
use smirnov::geom::{builtin, polygon, polyimage};
use smirnov::oracle::ReferenceMap;
use smirnov::ortho::SzegoState;
use smirnov::quad::{build_grid, build_grid_at, Measure};
use smirnov::{Poly, Resolution, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn complex() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
}

fn light() -> ProptestConfig {
    ProptestConfig {
        cases: 12,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(light())]

    #[test]
    fn p_norm_is_homogeneous_and_subadditive(
        p in 1.0..4.0f64,
        scale in complex(),
        seed in 0u64..1000,
    ) {
        let d = builtin::cubic();
        let g = build_grid(&d, 8, 8, 3.0).unwrap();
        let f: Vec<C64> = g.points().iter().map(|z| (z * (seed as f64 * 0.01 + 1.0)).exp()).collect();
        let h: Vec<C64> = g.points().iter().map(|z| c(seed as f64 * 0.1, 1.0) / (z - c(3.0, 0.0))).collect();
        let nf = g.p_norm(&f, p).unwrap();
        let scaled: Vec<C64> = f.iter().map(|v| v * scale).collect();
        let ns = g.p_norm(&scaled, p).unwrap();
        prop_assert!((ns - scale.norm() * nf).abs() <= 1e-13 * (1.0 + ns));
        let sum: Vec<C64> = f.iter().zip(&h).map(|(a, b)| a + b).collect();
        let lhs = g.p_norm(&sum, p).unwrap();
        let rhs = nf + g.p_norm(&h, p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-14));
    }

    #[test]
    fn random_convex_polygons_are_valid(cuts in prop::collection::vec(0.05..1.0f64, 3..9)) {
        let total: f64 = cuts.iter().sum();
        let mut angle = 0.0;
        let vertices: Vec<C64> = cuts
            .iter()
            .map(|t| {
                angle += TAU * t / total;
                C64::from_polar(1.0, angle)
            })
            .collect();
        // Skip polygons whose largest gap leaves the origin outside or on the boundary.
        prop_assume!(cuts.iter().all(|t| TAU * t / total < PI * 0.95));
        let d = polygon("random", &vertices, c(0.0, 0.0)).unwrap();
        prop_assert!(d.signed_area() > 0.0);
        prop_assert!((d.winding_number(d.zeta()) - 1.0).abs() < 1e-9);
        let turning: f64 = d.corners().iter().map(|k| (k.lambda - 1.0) * PI).sum();
        prop_assert!((turning - TAU).abs() < 1e-9);
        let g = build_grid_at(&d, Resolution::reference(&d)).unwrap();
        for k in [-1i32, 0, 2] {
            let f: Vec<C64> = g.points().iter().map(|z| z.powi(k)).collect();
            let got = g.integrate(&f, Measure::ComplexDz).unwrap();
            let want = if k == -1 { c(0.0, TAU) } else { c(0.0, 0.0) };
            prop_assert!((got - want).norm() < 1e-7, "k={} {}", k, got);
        }
    }

    #[test]
    fn newton_inverts_the_polynomial_map(r in 0.0..0.999f64, t in 0.0..TAU, a in 0.0..0.35f64) {
        let m = ReferenceMap::polyimage("q", &[c(0.0, 0.0), c(1.0, 0.0), c(a, 0.1 * a)], 1.0).unwrap();
        let w = C64::from_polar(r, t);
        let z = m.psi(w);
        let back = m.phi(z).unwrap();
        prop_assert!((m.psi(back) - z).norm() <= 1e-11);
        prop_assert!((back - w).norm() <= 1e-9);
        prop_assert_eq!(back, m.phi(z).unwrap());
    }

    #[test]
    fn kernel_reproduces_random_polynomials(coeffs in prop::collection::vec(complex(), 1..12)) {
        let d = builtin::unit_square();
        let g = build_grid_at(&d, Resolution::reference(&d)).unwrap();
        let s = SzegoState::build(&g, d.zeta(), 16).unwrap();
        let f = Poly::new(d.zeta(), coeffs);
        let fv = f.eval_many(g.points());
        let kv: Vec<C64> = g
            .points()
            .iter()
            .map(|z| s.szego_kernel_partial(*z, 16).unwrap())
            .collect();
        let w = g.arclength_weights();
        let ip: C64 = fv.iter().zip(&kv).zip(w).map(|((a, b), wi)| a * b.conj() * *wi).sum();
        let norm = g.p_norm(&fv, 2.0).unwrap();
        prop_assert!((ip - f.eval(d.zeta())).norm() <= 1e-7 * norm);
    }

    #[test]
    fn solver_is_feasible_and_monotone(p in 1.0..4.0f64, n in 1usize..9) {
        let d = builtin::ellipse();
        let g = build_grid_at(&d, Resolution::reference(&d)).unwrap();
        for target in [None, Some(ReferenceMap::for_domain(&d).unwrap().unwrap().phi_prime_power(g.points(), p).unwrap())] {
            let prob = ExtremalProblem::new(&g, d.zeta(), n, p, target).unwrap();
            let sol = prob.solve().unwrap();
            prop_assert!((sol.q.eval(d.zeta()) - 1.0).norm() <= 1e-10);
            prop_assert!(sol.objective_history.windows(2).all(|h| h[1] <= h[0]));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    #[test]
    fn sweep_rows_respect_the_sup_bound(a in 0.05..0.3f64, b in -0.1..0.1f64, p in prop::sample::select(vec![1.0, 2.0])) {
        let d = polyimage("random", &[c(0.0, 0.0), c(1.0, 0.0), c(a, b)], 1.0, c(0.0, 0.0)).unwrap();
        let cfg = RateConfig::new(d, p, vec![2, 4, 8, 16], ReferenceChoice::Oracle);
        let rep = run_rate_sweep(&cfg).unwrap();
        for r in &rep.rows {
            prop_assert!(r.err_p >= 0.0);
            prop_assert!(r.err_sup.unwrap() <= r.bound12.unwrap(), "n={} {:?} {:?}", r.n, r.err_sup, r.bound12);
        }
        prop_assert!(rep.monotone_violations.is_empty());
    }
}
