use num_complex::Complex64;
use proptest::prelude::*;

use wickflow::flow::{flow, kinetic_energy, rescale, PhasePoint};
use wickflow::geometry::{christoffel, curvature, ChartMetric};
use wickflow::half_forms::{pulled_back_volume_taylor, BaseGeometry};
use wickflow::manifold_file::ManifoldFile;
use wickflow::quadrature::{gaussian_moment, jt_exact_model, jt_quadrature, IntegrandMode, QuadratureConfig};
use wickflow::quantizer::extrapolate_to_zero;
use wickflow::test_function::TestFunction;

fn curved(which: u8) -> ChartMetric {
    match which % 3 {
        0 => ChartMetric::round_sphere(1.3).unwrap(),
        1 => ChartMetric::hyperbolic_halfplane(),
        _ => ChartMetric::surface_of_revolution(vec![1.0, 0.2, 0.4], (-1.0, 1.0)).unwrap(),
    }
}

/// A point well inside each curved chart, from unit-square coordinates.
fn inside(which: u8, a: f64, b: f64) -> Vec<f64> {
    match which % 3 {
        0 => vec![0.7 + 1.7 * a, 6.0 * b],
        1 => vec![-3.0 + 6.0 * a, 0.5 + 3.0 * b],
        _ => vec![-0.5 + a, 6.0 * b],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn christoffel_and_ricci_are_symmetric(which in 0u8..3, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let m = curved(which);
        let x = inside(which, a, b);
        let g = christoffel(&m, &x).unwrap();
        let c = curvature(&m, &x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    prop_assert_eq!(g.get(i, j, k).to_bits(), g.get(i, k, j).to_bits());
                }
                prop_assert_eq!(c.ricci[(i, j)].to_bits(), c.ricci[(j, i)].to_bits());
            }
        }
    }

    #[test]
    fn energy_is_conserved(which in 0u8..3, a in 0.0..1.0f64, b in 0.0..1.0f64, th in 0.0..6.3f64) {
        let m = curved(which);
        let z0 = PhasePoint::new(inside(which, a, b), vec![th.cos(), th.sin()]);
        let speed = (2.0 * kinetic_energy(&m, &z0).unwrap()).sqrt();
        let z = rescale(&z0, 0.4 / speed);
        let e0 = kinetic_energy(&m, &z).unwrap();
        let end = flow(&m, &z, 1.0, 0).unwrap();
        prop_assert!((kinetic_energy(&m, &end.point).unwrap() - e0).abs() <= 1e-10);
    }

    #[test]
    fn flow_is_reversible(which in 0u8..3, a in 0.0..1.0f64, b in 0.0..1.0f64, th in 0.0..6.3f64) {
        let m = curved(which);
        let z0 = PhasePoint::new(inside(which, a, b), vec![th.cos(), th.sin()]);
        let speed = (2.0 * kinetic_energy(&m, &z0).unwrap()).sqrt();
        let z = rescale(&z0, 0.5 / speed);
        let there = flow(&m, &z, 0.8, 0).unwrap().point;
        let back = flow(&m, &there, -0.8, 0).unwrap().point;
        for (u, v) in z.x.iter().chain(&z.p).zip(back.x.iter().chain(&back.p)) {
            prop_assert!((u - v).abs() <= 1e-8);
        }
    }

    #[test]
    fn rescaling_commutes_with_flow(which in 0u8..3, a in 0.0..1.0f64, b in 0.0..1.0f64, th in 0.0..6.3f64, t in 0.3..3.0f64) {
        let m = curved(which);
        let z0 = PhasePoint::new(inside(which, a, b), vec![th.cos(), th.sin()]);
        let speed = (2.0 * kinetic_energy(&m, &z0).unwrap()).sqrt();
        let z = rescale(&z0, 0.5 / speed);
        let sigma = 0.4 / t;
        let lhs = rescale(&flow(&m, &z, t * sigma, 300).unwrap().point, t);
        let rhs = flow(&m, &rescale(&z, t), sigma, 300).unwrap().point;
        for (u, v) in lhs.x.iter().chain(&lhs.p).zip(rhs.x.iter().chain(&rhs.p)) {
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
        }
        let e = kinetic_energy(&m, &z).unwrap();
        let et = kinetic_energy(&m, &rescale(&z, t)).unwrap();
        prop_assert!((et - t * t * e).abs() <= 1e-12 * et.max(1.0));
    }

    #[test]
    fn moments_vanish_for_odd_counts_and_scale(ix in proptest::collection::vec(0usize..3, 0..7), t in 1e-3..2.0f64, hbar in 0.2..2.0f64) {
        let v = gaussian_moment(&ix, t, hbar, 3).unwrap();
        let mut counts = [0usize; 3];
        for &i in &ix {
            counts[i] += 1;
        }
        if counts.iter().any(|c| c % 2 == 1) {
            prop_assert_eq!(v, 0.0);
        } else {
            let mut rev = ix.clone();
            rev.reverse();
            prop_assert_eq!(v, gaussian_moment(&rev, t, hbar, 3).unwrap());
            let v2 = gaussian_moment(&ix, 2.0 * t, hbar, 3).unwrap();
            let expect = 2f64.powi(ix.len() as i32 / 2);
            prop_assert!((v2 / v - expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn volume_taylor_is_quadratic_under_fibre_scaling(a in 0.0..1.0f64, b in 0.0..1.0f64, p0 in -0.8..0.8f64, p1 in -0.8..0.8f64, t in 0.0..1.5f64) {
        let m = curved(0);
        let base = BaseGeometry::new(&m, &inside(0, a, b)).unwrap();
        let rpp = base.ricci_quadratic(&[p0, p1]);
        let v = pulled_back_volume_taylor(&base, &[t * p0, t * p1]).unwrap();
        prop_assert!((v - (1.0 - t * t * rpp / 6.0)).abs() <= 1e-14);
    }

    #[test]
    fn exact_mode_matches_closed_form(k0 in -5i64..=5, k1 in -5i64..=5, q0 in 0.0..6.2f64, q1 in 0.0..6.2f64, t in 1e-3..1e-2f64) {
        let torus = ChartMetric::flat_torus(2).unwrap();
        let psi = TestFunction::fourier(vec![k0, k1]);
        let q = [q0, q1];
        let r = 8.0 * t.sqrt();
        let cfg = QuadratureConfig::new(r, t, 1.0).with_mode(IntegrandMode::Exact);
        let v = jt_quadrature(&torus, &psi, &q, &cfg).unwrap();
        let w = jt_exact_model(&torus, &psi, &q, t, 1.0, Some(r)).unwrap();
        prop_assert!((v - w).norm() <= 1e-8 * w.norm());
    }

    #[test]
    fn neville_reproduces_cubic_data(c0 in -2.0..2.0f64, c1 in -2.0..2.0f64, c3 in -2.0..2.0f64) {
        let ts = [8e-3, 4e-3, 2e-3, 1e-3];
        let ds: Vec<Complex64> = ts.iter().map(|t| Complex64::new(c0 + c1 * t + c3 * t * t * t, -c0)).collect();
        let v = extrapolate_to_zero(&ts, &ds);
        prop_assert!((v - Complex64::new(c0, -c0)).norm() <= 1e-11);
    }

    #[test]
    fn manifold_file_round_trips(radius in 0.1..10.0f64, order in prop_oneof![Just(2usize), Just(4), Just(6)], step in 1e-4..1e-2f64) {
        let f = ManifoldFile::parse(&format!(
            "kind = \"round_sphere\"\nradius = {radius:?}\nfd_order = {order}\nfd_step = {step:?}\n"
        )).unwrap();
        prop_assert_eq!(ManifoldFile::parse(&f.to_toml()).unwrap(), f.clone());
        let m = f.to_metric().unwrap();
        prop_assert_eq!(m.fd().order, order);
        prop_assert_eq!(m.fd().step, step);
    }
}
