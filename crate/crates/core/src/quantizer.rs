//! Assembly of `Q(E)`: extrapolated `ħ d/dt j_t` against the analytic
//! operator, the prequantum flow, the holomorphic-section check and flat
//! spectra.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fd::FdConfig;
use crate::flow::{self, kinetic_energy, PhasePoint};
use crate::geometry::{curvature, ChartMetric};
use crate::quadrature::{odometer, rules, IntegrandMode, JtEvaluator, QuadratureConfig};
use crate::test_function::TestFunction;

/// Points with `|analytic| ≤ DEGENERATE_ANALYTIC` are excluded from relative errors.
pub const DEGENERATE_ANALYTIC: f64 = 1e-8;

/// The t-grid used for asymptotic fits unless told otherwise.
pub const DEFAULT_T_GRID: [f64; 4] = [8e-3, 4e-3, 2e-3, 1e-3];

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Laplace–Beltrami operator in divergence form,
/// `(1/√g) ∂_i(√g g^{ij} ∂_jψ)`, differenced with the metric's stencil.
pub fn divergence_laplacian(metric: &ChartMetric, psi: &TestFunction, q: &[f64]) -> Result<Complex64> {
    let fd = metric.fd();
    metric.domain().check(q, fd.reach())?;
    psi.check_dim(metric.dim())?;
    let n = metric.dim();
    let flux = |x: &[f64], i: usize| -> Result<Complex64> {
        let (g, g_inv) = metric.checked(x)?;
        let grad = psi.jet(x)?.grad;
        let sq = g.determinant().sqrt();
        let mut v = Complex64::new(0.0, 0.0);
        for j in 0..n {
            v += grad[j] * g_inv[(i, j)];
        }
        Ok(v * sq)
    };
    let h = fd.step;
    let mut probe = q.to_vec();
    let mut div = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for (k, w) in fd.first_weights().iter().enumerate() {
            let s = (k + 1) as f64 * h;
            probe[i] = q[i] + s;
            let fp = flux(&probe, i)?;
            probe[i] = q[i] - s;
            let fm = flux(&probe, i)?;
            div += (fp - fm) * (*w / h);
        }
        probe[i] = q[i];
    }
    let (g, _) = metric.checked(q)?;
    Ok(div / g.determinant().sqrt())
}

/// `−(ħ²/2)(Δψ − Sψ/6)` at `q`.
pub fn analytic_qe(metric: &ChartMetric, psi: &TestFunction, q: &[f64], hbar: f64) -> Result<Complex64> {
    check_hbar(hbar)?;
    let lap = divergence_laplacian(metric, psi, q)?;
    let s = if metric.is_flat() { 0.0 } else { curvature(metric, q)?.scalar };
    Ok(-0.5 * hbar * hbar * (lap - psi.eval(q) * (s / 6.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericQe {
    pub value: Complex64,
    pub error_estimate: f64,
    /// `t_grid` sorted in decreasing order, with the matching `j_t` values.
    pub t_grid: Vec<f64>,
    pub jt: Vec<Complex64>,
}

/// Extrapolates `D(t)` to `t = 0` through every sample (Neville's scheme).
pub fn extrapolate_to_zero(ts: &[f64], ds: &[Complex64]) -> Complex64 {
    let mut p = ds.to_vec();
    let m = ts.len();
    for level in 1..m {
        for i in 0..(m - level) {
            let (a, b) = (ts[i], ts[i + level]);
            p[i] = (p[i + 1] * a - p[i] * b) / (a - b);
        }
    }
    p[0]
}

/// Extrapolated value and error estimate for `(j_t − ψ(q))/t` samples.
pub fn richardson(ts: &[f64], jt: &[Complex64], psi_q: Complex64) -> Result<(Complex64, f64)> {
    if ts.len() != jt.len() || ts.len() < 2 {
        return Err(Error::InvalidInput("Richardson extrapolation needs at least two samples".into()));
    }
    let ds: Vec<Complex64> = ts.iter().zip(jt).map(|(t, j)| (j - psi_q) / *t).collect();
    let all = extrapolate_to_zero(ts, &ds);
    let m = ts.len();
    let drop_small = extrapolate_to_zero(&ts[..m - 1], &ds[..m - 1]);
    let drop_large = extrapolate_to_zero(&ts[1..], &ds[1..]);
    // rounding of j_t amplified by the Lagrange weights at 0 and by 1/t
    let lebesgue: f64 = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| j != i)
                .map(|j| (ts[j] / (ts[j] - ts[i])).abs())
                .product::<f64>()
                / ts[i]
        })
        .sum();
    let jmax = jt.iter().fold(psi_q.norm(), |a, j| a.max(j.norm()));
    let floor = 64.0 * f64::EPSILON * jmax * lebesgue;
    let err = 2.0 * (all - drop_small).norm().max((all - drop_large).norm()) + floor;
    Ok((all, err))
}

fn sorted_grid(t_grid: &[f64]) -> Result<Vec<f64>> {
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidInput("t-grid values must be positive".into()));
    }
    let mut ts = t_grid.to_vec();
    ts.sort_by(|a, b| b.total_cmp(a));
    if ts.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("t-grid values must be distinct".into()));
    }
    if ts.len() < 2 {
        return Err(Error::InvalidInput("t-grid needs at least two values".into()));
    }
    Ok(ts)
}

/// `ħ d/dt|₀ j_t(q)` by extrapolation over `t_grid`. `cfg.t` is ignored; in
/// Taylor mode the cutoff is clipped to `r′(q)`.
pub fn numeric_qe(
    metric: &ChartMetric,
    psi: &TestFunction,
    q: &[f64],
    t_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<NumericQe> {
    let ts = sorted_grid(t_grid)?;
    let ev = JtEvaluator::new(metric, psi, q, cfg.mode)?;
    let mut cfg = *cfg;
    cfg.r = crate::quadrature::r_prime(ev.base(), cfg.r);
    let jt = ts.iter().map(|&t| ev.jt(&cfg.with_t(t))).collect::<Result<Vec<_>>>()?;
    let (d0, err) = richardson(&ts, &jt, ev.psi_value())?;
    let value = d0 * cfg.hbar;
    let error_estimate = err * cfg.hbar;
    if error_estimate > 0.1 * value.norm() + 1e-8 {
        return Err(Error::ExtrapolationNonConvergence {
            estimate: value.norm(),
            spread: error_estimate,
        });
    }
    Ok(NumericQe {
        value,
        error_estimate,
        t_grid: ts,
        jt,
    })
}

/// Default quadrature settings for `numeric_qe`: cutoff `12√(t_max ħ)` and
/// the mode that is exact for the model (closed-form continuation on flat
/// models with Fourier data, Taylor otherwise).
pub fn default_config(metric: &ChartMetric, psi: &TestFunction, t_grid: &[f64], hbar: f64) -> QuadratureConfig {
    let tmax = t_grid.iter().cloned().fold(0.0, f64::max);
    let mode = if metric.is_flat() && psi.has_continuation() {
        IntegrandMode::Exact
    } else {
        IntegrandMode::Taylor
    };
    QuadratureConfig::new(12.0 * (tmax * hbar).sqrt(), tmax, hbar).with_mode(mode)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub q: Vec<f64>,
    pub numeric: NumericQe,
    pub analytic: Complex64,
}

pub fn quantize_point(
    metric: &ChartMetric,
    psi: &TestFunction,
    q: &[f64],
    t_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<PointResult> {
    Ok(PointResult {
        q: q.to_vec(),
        numeric: numeric_qe(metric, psi, q, t_grid, cfg)?,
        analytic: analytic_qe(metric, psi, q, cfg.hbar)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationReport {
    pub q_grid: Vec<Vec<f64>>,
    pub t_grid: Vec<f64>,
    pub hbar: f64,
    pub numeric_qe: Vec<Complex64>,
    pub analytic_qe: Vec<Complex64>,
    pub error_estimates: Vec<f64>,
    /// `None` at degenerate points.
    pub rel_errors: Vec<Option<f64>>,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// Indices of points with `|analytic| ≤ 1e-8`.
    pub degenerate: Vec<usize>,
}

impl QuantizationReport {
    pub fn assemble(t_grid: &[f64], hbar: f64, points: Vec<PointResult>) -> Self {
        let mut rep = QuantizationReport {
            q_grid: Vec::with_capacity(points.len()),
            t_grid: points.first().map(|p| p.numeric.t_grid.clone()).unwrap_or_else(|| t_grid.to_vec()),
            hbar,
            numeric_qe: Vec::new(),
            analytic_qe: Vec::new(),
            error_estimates: Vec::new(),
            rel_errors: Vec::new(),
            max_rel_error: 0.0,
            max_abs_error: 0.0,
            degenerate: Vec::new(),
        };
        for (i, p) in points.into_iter().enumerate() {
            let diff = (p.numeric.value - p.analytic).norm();
            rep.max_abs_error = rep.max_abs_error.max(diff);
            let rel = if p.analytic.norm() > DEGENERATE_ANALYTIC {
                let r = diff / p.analytic.norm();
                rep.max_rel_error = rep.max_rel_error.max(r);
                Some(r)
            } else {
                rep.degenerate.push(i);
                None
            };
            rep.q_grid.push(p.q);
            rep.numeric_qe.push(p.numeric.value);
            rep.analytic_qe.push(p.analytic);
            rep.error_estimates.push(p.numeric.error_estimate);
            rep.rel_errors.push(rel);
        }
        rep
    }
}

pub fn quantize(
    metric: &ChartMetric,
    psi: &TestFunction,
    q_grid: &[Vec<f64>],
    t_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuantizationReport> {
    let points = q_grid
        .iter()
        .map(|q| quantize_point(metric, psi, q, t_grid, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantizationReport::assemble(t_grid, cfg.hbar, points))
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("hbar must be positive (got {hbar})")))
    }
}

/// `ρ̂_σψ(z) = e^{iσE(z)/ħ} ψ(π Φ_σ z)`.
pub fn prequantum_flow(
    metric: &ChartMetric,
    psi: &TestFunction,
    z: &PhasePoint,
    sigma: f64,
    hbar: f64,
    steps: usize,
) -> Result<Complex64> {
    check_hbar(hbar)?;
    psi.check_dim(metric.dim())?;
    let e = kinetic_energy(metric, z)?;
    let opts = flow::FlowOptions {
        steps,
        track_jacobian: false,
        ..flow::FlowOptions::default()
    };
    let end = flow::flow_with(metric, z, sigma, &opts, |_| {})?;
    Ok(Complex64::from_polar(1.0, sigma * e / hbar) * psi.eval(&end.point.x))
}

/// `(X_E + (i/ħ)E)ψ` at `z`, with `X_Eψ = (g⁻¹p)·∇ψ`.
pub fn prequantum_generator(metric: &ChartMetric, psi: &TestFunction, z: &PhasePoint, hbar: f64) -> Result<Complex64> {
    check_hbar(hbar)?;
    let (_, g_inv) = metric.checked(&z.x)?;
    let jet = psi.jet(&z.x)?;
    let n = metric.dim();
    let mut xe = Complex64::new(0.0, 0.0);
    for a in 0..n {
        let v: f64 = (0..n).map(|b| g_inv[(a, b)] * z.p[b]).sum();
        xe += jet.grad[a] * v;
    }
    let e = kinetic_energy(metric, z)?;
    Ok(xe + I * (e / hbar) * jet.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoloCheck {
    /// Max over the grid of `|∇_Z s|` (Euclidean over the n directions).
    pub residual: f64,
    /// Max of the same quantity with the weight `e^{−tE/ħ}` removed.
    pub control_residual: f64,
    /// Min over grid points with `p ≠ 0` of the control residual divided by
    /// `t|p||s|/ħ`.
    pub control_min_ratio: f64,
    pub points: usize,
}

/// Sample grid: `size` positions times `size` momenta in `[−p_max, p_max]`.
/// For `n > 1` the remaining axes are offset copies of the first.
pub fn holo_grid(n: usize, size: usize, p_max: f64) -> Vec<PhasePoint> {
    let mut out = Vec::with_capacity(size * size);
    for i in 0..size {
        let x0 = 2.0 * PI * i as f64 / size as f64;
        for j in 0..size {
            let p0 = if size > 1 {
                -p_max + 2.0 * p_max * j as f64 / (size - 1) as f64
            } else {
                0.0
            };
            let x = (0..n).map(|a| x0 + 0.37 * a as f64).collect();
            let p = (0..n).map(|a| p0 / (a + 1) as f64).collect();
            out.push(PhasePoint::new(x, p));
        }
    }
    out
}

/// Covariant derivative `(d + (i/ħ)θ)s` of `s = ψ_ℂ(x + itp) e^{−t|p|²/2ħ}`
/// along `Z_a = t∂_{x_a} + i∂_{p_a}`, the anti-holomorphic directions of
/// `x + itp`, differenced with a sixth-order stencil.
pub fn holomorphic_section_check(
    metric: &ChartMetric,
    psi: &TestFunction,
    t: f64,
    hbar: f64,
    grid: &[PhasePoint],
) -> Result<HoloCheck> {
    check_hbar(hbar)?;
    if !metric.is_flat() {
        return Err(Error::Unsupported(format!(
            "holomorphic-section check needs a flat model (got {})",
            metric.kind().name()
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("t must be positive (got {t})")));
    }
    psi.check_dim(metric.dim())?;
    if !psi.has_continuation() {
        return Err(Error::Unsupported(format!("{} has no holomorphic continuation", psi.name())));
    }
    let n = metric.dim();
    let fd = FdConfig::new(6, 2e-3)?;
    let section = |x: &[f64], p: &[f64], weighted: bool| -> Complex64 {
        let z: Vec<Complex64> = x.iter().zip(p).map(|(x, p)| Complex64::new(*x, t * p)).collect();
        let v = psi.continue_complex(&z).expect("continuation checked above");
        if weighted {
            let p2: f64 = p.iter().map(|v| v * v).sum();
            v * (-t * p2 / (2.0 * hbar)).exp()
        } else {
            v
        }
    };
    let cdiff = |f: &dyn Fn(f64) -> Complex64| -> Complex64 {
        let re = fd.derivative(|s| f(s).re);
        let im = fd.derivative(|s| f(s).im);
        Complex64::new(re, im)
    };
    let mut out = HoloCheck {
        residual: 0.0,
        control_residual: 0.0,
        control_min_ratio: f64::INFINITY,
        points: grid.len(),
    };
    for z in grid {
        if z.x.len() != n || z.p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.x.len(),
            });
        }
        let mut res = [0.0f64; 2];
        for (slot, weighted) in [(0usize, true), (1, false)] {
            let s0 = section(&z.x, &z.p, weighted);
            let mut acc = 0.0;
            for a in 0..n {
                let dx = cdiff(&|h| {
                    let mut x = z.x.clone();
                    x[a] += h;
                    section(&x, &z.p, weighted)
                });
                let dp = cdiff(&|h| {
                    let mut p = z.p.clone();
                    p[a] += h;
                    section(&z.x, &p, weighted)
                });
                let cov = dx * t + I * dp + I * (t * z.p[a] / hbar) * s0;
                acc += cov.norm_sqr();
            }
            res[slot] = acc.sqrt();
            if !weighted {
                let pn = z.p.iter().map(|v| v * v).sum::<f64>().sqrt();
                if pn > 0.0 && s0.norm() > 0.0 {
                    out.control_min_ratio = out.control_min_ratio.min(res[1] / (t * pn * s0.norm() / hbar));
                }
            }
        }
        out.residual = out.residual.max(res[0]);
        out.control_residual = out.control_residual.max(res[1]);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub k: Vec<i64>,
    /// `ħ²|k|²/2`.
    pub eigenvalue: f64,
    /// `numeric_QE(ψ_k)(q) / ψ_k(q)`.
    pub numeric: Complex64,
    pub error_estimate: f64,
}

/// Integer modes with `max_a |k_a| ≤ k_max`, ordered by `|k|²` then lexicographically.
pub fn fourier_modes(n: usize, k_max: u32) -> Vec<Vec<i64>> {
    let side = 2 * k_max as usize + 1;
    let mut idx = vec![0usize; n];
    let mut out = Vec::new();
    loop {
        out.push(idx.iter().map(|&i| i as i64 - k_max as i64).collect::<Vec<_>>());
        if !odometer(&mut idx, side) {
            break;
        }
    }
    out.sort_by(|a, b| {
        let na: i64 = a.iter().map(|v| v * v).sum();
        let nb: i64 = b.iter().map(|v| v * v).sum();
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    out
}

pub fn flat_spectrum(
    metric: &ChartMetric,
    hbar: f64,
    k_max: u32,
    q: &[f64],
    t_grid: &[f64],
) -> Result<Vec<SpectrumEntry>> {
    fourier_modes(metric.dim(), k_max)
        .iter()
        .map(|k| flat_spectrum_mode(metric, hbar, k, q, t_grid))
        .collect()
}

/// One entry of `flat_spectrum`.
pub fn flat_spectrum_mode(
    metric: &ChartMetric,
    hbar: f64,
    k: &[i64],
    q: &[f64],
    t_grid: &[f64],
) -> Result<SpectrumEntry> {
    if !metric.is_flat() {
        return Err(Error::Unsupported(format!(
            "flat spectrum needs circle or flat_torus (got {})",
            metric.kind().name()
        )));
    }
    let psi = TestFunction::fourier(k.to_vec());
    psi.check_dim(metric.dim())?;
    let cfg = default_config(metric, &psi, t_grid, hbar);
    let nq = numeric_qe(metric, &psi, q, t_grid, &cfg)?;
    Ok(SpectrumEntry {
        k: k.to_vec(),
        eigenvalue: 0.5 * hbar * hbar * k.iter().map(|v| (v * v) as f64).sum::<f64>(),
        numeric: nq.value / psi.eval(q),
        error_estimate: nq.error_estimate,
    })
}

/// `∫ f √det g dx` over the chart box: periodic trapezoid on periodic axes,
/// Gauss–Legendre on the others.
pub fn chart_integral<F>(metric: &ChartMetric, nodes: usize, f: F) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Result<Complex64>,
{
    let dom = metric.domain();
    let n = metric.dim();
    let gl = rules::gauss_legendre(nodes);
    let axis: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|a| {
            let (lo, hi) = (dom.lo[a], dom.hi[a]);
            if dom.periodic[a] {
                let h = (hi - lo) / nodes as f64;
                (0..nodes).map(|i| (lo + i as f64 * h, h)).collect()
            } else {
                let half = 0.5 * (hi - lo);
                gl.nodes.iter().zip(&gl.weights).map(|(x, w)| (lo + half * (x + 1.0), half * w)).collect()
            }
        })
        .collect();
    let mut idx = vec![0usize; n];
    let mut acc = Complex64::new(0.0, 0.0);
    let mut x = vec![0.0; n];
    loop {
        let mut w = 1.0;
        for a in 0..n {
            x[a] = axis[a][idx[a]].0;
            w *= axis[a][idx[a]].1;
        }
        let (g, _) = metric.checked(&x)?;
        acc += f(&x)? * (w * g.determinant().sqrt());
        if !odometer(&mut idx, nodes) {
            break;
        }
    }
    Ok(acc)
}
