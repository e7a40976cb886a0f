use std::f64::consts::PI;

use num_complex::Complex64;

use wickflow::geometry::{normal_coords_det_g_with, normal_frame, ChartMetric};
use wickflow::half_forms::BaseGeometry;
use wickflow::quadrature::{jt_quadrature, IntegrandMode, QuadratureConfig};
use wickflow::quantizer::{analytic_qe, chart_integral, default_config, numeric_qe, quantize, DEFAULT_T_GRID};
use wickflow::test_function::TestFunction;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn poly(src: &str, n: usize) -> TestFunction {
    src.parse::<TestFunction>().unwrap().with_dim(n)
}

#[test]
fn numeric_matches_analytic_on_every_builtin() {
    let surface = ChartMetric::surface_of_revolution(vec![1.0, 0.0, 0.3], (-1.0, 1.0)).unwrap();
    let cases: Vec<(ChartMetric, TestFunction, Vec<Vec<f64>>, f64)> = vec![
        (ChartMetric::circle(), TestFunction::fourier(vec![4]), vec![vec![0.3], vec![2.0]], 1e-6),
        (ChartMetric::flat_torus(2).unwrap(), TestFunction::fourier(vec![2, -1]), vec![vec![0.3, 4.0]], 1e-6),
        (ChartMetric::flat_torus(2).unwrap(), poly("poly:x0^2*x1+x1^3", 2), vec![vec![1.0, 2.0]], 1e-2),
        (ChartMetric::round_sphere(2.0).unwrap(), TestFunction::SphericalHarmonic { l: 2, m: 1 }, vec![vec![1.0, 0.4], vec![2.2, 3.0]], 1e-2),
        (ChartMetric::round_sphere(1.0).unwrap(), poly("poly:x0^2+x1", 2), vec![vec![1.2, 0.5]], 1e-2),
        (ChartMetric::hyperbolic_halfplane(), poly("poly:x0^2+x1^3", 2), vec![vec![0.3, 1.2], vec![-2.0, 4.0]], 1e-2),
        (surface, poly("poly:x0^2+x0*x1", 2), vec![vec![0.2, 1.0]], 1e-2),
    ];
    for (metric, psi, qs, tol) in cases {
        let cfg = default_config(&metric, &psi, &DEFAULT_T_GRID, 1.0);
        let rep = quantize(&metric, &psi, &qs, &DEFAULT_T_GRID, &cfg).unwrap();
        assert!(rep.max_rel_error <= tol, "{} {}: {}", metric.kind().name(), psi.name(), rep.max_rel_error);
    }
}

#[test]
fn linearity() {
    let s = ChartMetric::round_sphere(1.0).unwrap();
    let (a, b) = (Complex64::new(0.7, -1.2), Complex64::new(-0.3, 2.0));
    let p1 = TestFunction::SphericalHarmonic { l: 1, m: 1 };
    let p2 = poly("poly:x0^2-x1", 2);
    let combo = TestFunction::Combination(vec![(a, p1.clone()), (b, p2.clone())]);
    let cfg = default_config(&s, &combo, &DEFAULT_T_GRID, 0.8);
    let q = [1.3, 0.9];
    let v = numeric_qe(&s, &combo, &q, &DEFAULT_T_GRID, &cfg).unwrap();
    let v1 = numeric_qe(&s, &p1, &q, &DEFAULT_T_GRID, &cfg).unwrap();
    let v2 = numeric_qe(&s, &p2, &q, &DEFAULT_T_GRID, &cfg).unwrap();
    let tol = v.error_estimate + a.norm() * v1.error_estimate + b.norm() * v2.error_estimate;
    assert!((v.value - (a * v1.value + b * v2.value)).norm() <= tol.max(1e-12));
}

#[test]
fn formally_self_adjoint_on_flat_torus() {
    let torus = ChartMetric::flat_torus(2).unwrap();
    let half = |k: Vec<i64>| {
        let minus: Vec<i64> = k.iter().map(|v| -v).collect();
        TestFunction::Combination(vec![(c(0.5), TestFunction::fourier(k)), (c(0.5), TestFunction::fourier(minus))])
    };
    let psi = TestFunction::Combination(vec![(c(1.0), half(vec![1, 2])), (c(0.4), half(vec![2, 0]))]);
    let psi2 = TestFunction::Combination(vec![(c(0.8), half(vec![1, 2])), (c(-1.5), half(vec![2, 0])), (c(0.3), half(vec![0, 1]))]);
    let cfg = default_config(&torus, &psi, &DEFAULT_T_GRID, 1.0);
    let qe = |f: &TestFunction, x: &[f64]| numeric_qe(&torus, f, x, &DEFAULT_T_GRID, &cfg).map(|v| v.value);
    let lhs = chart_integral(&torus, 12, |x| Ok(psi2.eval(x).conj() * qe(&psi, x)?)).unwrap();
    let rhs = chart_integral(&torus, 12, |x| Ok(qe(&psi2, x)?.conj() * psi.eval(x))).unwrap();
    // 4π² (0.8·5/2·½ − 1.5·0.4·2·½) from orthogonality of the modes
    let expect = 4.0 * PI * PI * (0.8 * 2.5 * 0.5 - 1.5 * 0.4 * 2.0 * 0.5);
    assert!((lhs - rhs).norm() <= 1e-6 * lhs.norm());
    assert!((lhs.re - expect).abs() <= 1e-6 * expect.abs());
}

#[test]
fn cutoff_beyond_eight_widths_is_irrelevant() {
    let s = ChartMetric::round_sphere(1.0).unwrap();
    let psi = TestFunction::SphericalHarmonic { l: 1, m: 0 };
    let q = [1.0, 0.2];
    for &t in &[1e-3f64, 4e-3] {
        let base = QuadratureConfig::new(8.0 * t.sqrt(), t, 1.0).with_mode(IntegrandMode::Taylor);
        let v8 = jt_quadrature(&s, &psi, &q, &base).unwrap();
        let v12 = jt_quadrature(&s, &psi, &q, &QuadratureConfig { r: 12.0 * t.sqrt(), ..base }).unwrap();
        assert!((v8 - v12).norm() <= (-20.0f64).exp() * v12.norm());
    }
}

#[test]
fn analytic_operator_on_sphere_harmonic() {
    let s = ChartMetric::round_sphere(1.0).unwrap();
    let q = [0.9, 1.0];
    let psi = TestFunction::SphericalHarmonic { l: 3, m: -2 };
    // −(ħ²/2)(−l(l+1) − S/6) with S = 2
    let expect = psi.eval(&q) * (0.5 * (12.0 + 1.0 / 3.0));
    assert!((analytic_qe(&s, &psi, &q, 1.0).unwrap() - expect).norm() <= 1e-8);
}

#[test]
fn normal_det_exponent_on_small_radii() {
    let radii = [1e-2, 2e-2, 5e-2, 1e-1];
    for (metric, q) in [
        (ChartMetric::round_sphere(1.0).unwrap(), vec![1.0, 0.7]),
        (ChartMetric::hyperbolic_halfplane(), vec![0.3, 1.2]),
    ] {
        let frame = normal_frame(&metric, &q).unwrap();
        let ric = BaseGeometry::new(&metric, &q).unwrap().ricci_frame;
        let u = [0.6, 0.8];
        let pts: Vec<(f64, f64)> = radii
            .iter()
            .map(|&s| {
                let y = [s * u[0], s * u[1]];
                let quad = ric[(0, 0)] * y[0] * y[0] + 2.0 * ric[(0, 1)] * y[0] * y[1] + ric[(1, 1)] * y[1] * y[1];
                let det = normal_coords_det_g_with(&metric, &frame, &y, 1000).unwrap();
                (s.ln(), (det - (1.0 - quad / 3.0)).abs().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!(slope >= 2.7, "{}: {slope}", metric.kind().name());
    }
}
