//! The Wick-rotated fibre integral `j_t^r(q)`, its Laplace expansion,
//! Gaussian moments, the validity radius and tail estimates.

mod divergence;
pub mod rules;
mod tails;

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::{erf::erf, gamma::gamma_lr};

use crate::error::{Error, Result};
use crate::geometry::ChartMetric;
use crate::half_forms::{bks_density_wick, BaseGeometry};
use crate::test_function::{PsiJet, TestFunction};

pub use divergence::{real_time_divergence_demo, DivergenceRow};
pub use tails::{tail_mass, TailMass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Tensor Gauss–Hermite scaled to the Gaussian width, nodes outside the
    /// ball dropped.
    GaussHermiteTruncated,
    /// Tensor trapezoid on the box `[−L, L]ⁿ`, `L = min(r, 12√(tħ))`.
    TensorTrapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrandMode {
    /// Second-order Taylor data of ψ and of the half-form pairing.
    Taylor,
    /// Holomorphic continuation `ψ_ℂ(q + ip)`; flat models only.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub r: f64,
    pub t: f64,
    pub hbar: f64,
    pub nodes_per_axis: usize,
    pub scheme: Scheme,
    pub mode: IntegrandMode,
    /// Allowed change under node doubling, relative to `max(1, |j_t|)`.
    pub tolerance: f64,
}

impl QuadratureConfig {
    pub fn new(r: f64, t: f64, hbar: f64) -> Self {
        QuadratureConfig {
            r,
            t,
            hbar,
            nodes_per_axis: 64,
            scheme: Scheme::GaussHermiteTruncated,
            mode: IntegrandMode::Taylor,
            tolerance: 1e-10,
        }
    }

    pub fn with_mode(mut self, mode: IntegrandMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be positive and finite (got {v})")))
            }
        };
        pos(self.r, "r")?;
        pos(self.t, "t")?;
        pos(self.hbar, "hbar")?;
        pos(self.tolerance, "tolerance")?;
        if self.nodes_per_axis < 2 {
            return Err(Error::InvalidInput("nodes_per_axis must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionResult {
    pub a0: Complex64,
    pub a1: Complex64,
    pub t_used: f64,
    pub jt_numeric: Complex64,
    /// `|j_t − (a0 + a1 t)|`.
    pub residual: f64,
}

/// `t^{−n/2} ∫ p_{i₁}⋯p_{i_l} e^{−|p|²/2tħ} dⁿp` over `ℝⁿ` (0-based axis indices).
pub fn gaussian_moment(indices: &[usize], t: f64, hbar: f64, n: usize) -> Result<f64> {
    if !(t > 0.0 && hbar > 0.0) {
        return Err(Error::InvalidInput(format!("t and hbar must be positive (got {t}, {hbar})")));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidInput(format!("axis index {bad} out of range for n = {n}")));
    }
    let mut counts = vec![0u32; n];
    for &i in indices {
        counts[i] += 1;
    }
    let s = t * hbar;
    let mut v = (2.0 * PI * hbar).powf(n as f64 / 2.0);
    for c in counts {
        if c % 2 == 1 {
            return Ok(0.0);
        }
        v *= double_factorial(c.saturating_sub(1)) * s.powi(c as i32 / 2);
    }
    Ok(v)
}

fn double_factorial(k: u32) -> f64 {
    (1..=k).rev().step_by(2).map(|v| v as f64).product()
}

/// `min(r, √(3/‖Ric‖_op))` at the base point; `r` when Ricci vanishes.
pub fn r_prime(base: &BaseGeometry, r: f64) -> f64 {
    let norm = base.ricci_norm();
    if norm == 0.0 {
        r
    } else {
        r.min((3.0 / norm).sqrt())
    }
}

pub fn r_prime_at(metric: &ChartMetric, q: &[f64], r: f64) -> Result<f64> {
    Ok(r_prime(&BaseGeometry::new(metric, q)?, r))
}

/// Minimum of `r_prime` over a `per_axis`-point grid of cell centres of the
/// chart box, skipping points whose curvature stencil leaves the domain.
pub fn r_prime_global(metric: &ChartMetric, r: f64, per_axis: usize) -> Result<f64> {
    if metric.is_flat() {
        return Ok(r);
    }
    let dom = metric.domain();
    let n = metric.dim();
    let per_axis = per_axis.max(1);
    let mut best = r;
    let mut idx = vec![0usize; n];
    let mut visited = 0usize;
    loop {
        let x: Vec<f64> = (0..n)
            .map(|a| dom.lo[a] + (idx[a] as f64 + 0.5) * (dom.hi[a] - dom.lo[a]) / per_axis as f64)
            .collect();
        match BaseGeometry::new(metric, &x) {
            Ok(b) => {
                best = best.min(r_prime(&b, r));
                visited += 1;
            }
            Err(Error::Domain { .. }) => {}
            Err(e) => return Err(e),
        }
        if !odometer(&mut idx, per_axis) {
            break;
        }
    }
    if visited == 0 {
        return Err(Error::InvalidInput("no admissible sample points for r'".into()));
    }
    Ok(best)
}

/// Advances a base-`size` counter; false once it wraps.
pub(crate) fn odometer(idx: &mut [usize], size: usize) -> bool {
    for v in idx.iter_mut() {
        *v += 1;
        if *v < size {
            return true;
        }
        *v = 0;
    }
    false
}

/// `ψ(q) + i pᵏ∂_kψ − ½ pʲpᵏ∂_j∂_kψ` from normal-coordinate derivatives.
pub fn psi_flow_taylor(normal: &PsiJet, p: &[f64]) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let n = p.len();
    let mut lin = Complex64::new(0.0, 0.0);
    let mut quad = Complex64::new(0.0, 0.0);
    for a in 0..n {
        lin += normal.grad[a] * p[a];
        for b in 0..n {
            quad += normal.hess[(a, b)] * (p[a] * p[b]);
        }
    }
    normal.value + i * lin - 0.5 * quad
}

/// `(2πs)^{−n/2} ∫_{B(r)} f(p) e^{−|p|²/2s} dⁿp`.
pub fn integrate_ball<F>(n: usize, r: f64, s: f64, scheme: Scheme, nodes: usize, mut f: F) -> Result<Complex64>
where
    F: FnMut(&[f64]) -> Result<Complex64>,
{
    let r2 = r * r;
    let mut p = vec![0.0; n];
    let mut idx = vec![0usize; n];
    let mut acc = Complex64::new(0.0, 0.0);
    match scheme {
        Scheme::GaussHermiteTruncated => {
            let rule = rules::gauss_hermite(nodes);
            let scale = (2.0 * s).sqrt();
            let norm = PI.sqrt().powi(n as i32);
            loop {
                let mut w = 1.0;
                let mut p2 = 0.0;
                for a in 0..n {
                    p[a] = scale * rule.nodes[idx[a]];
                    w *= rule.weights[idx[a]];
                    p2 += p[a] * p[a];
                }
                if p2 < r2 {
                    acc += f(&p)? * (w / norm);
                }
                if !odometer(&mut idx, nodes) {
                    break;
                }
            }
        }
        Scheme::TensorTrapezoid => {
            let half = r.min(12.0 * s.sqrt());
            let h = 2.0 * half / nodes as f64;
            let norm = (2.0 * PI * s).powf(-(n as f64) / 2.0) * h.powi(n as i32);
            loop {
                let mut w = 1.0;
                let mut p2 = 0.0;
                for a in 0..n {
                    p[a] = -half + idx[a] as f64 * h;
                    if idx[a] == 0 || idx[a] == nodes {
                        w *= 0.5;
                    }
                    p2 += p[a] * p[a];
                }
                if p2 < r2 {
                    acc += f(&p)? * (w * (-p2 / (2.0 * s)).exp());
                }
                if !odometer(&mut idx, nodes + 1) {
                    break;
                }
            }
            acc *= norm;
        }
    }
    Ok(acc)
}

/// Precomputed base-point data for repeated evaluation of `j_t` at one `q`.
#[derive(Debug, Clone)]
pub struct JtEvaluator {
    psi: TestFunction,
    base: BaseGeometry,
    normal: PsiJet,
    mode: IntegrandMode,
}

impl JtEvaluator {
    pub fn new(metric: &ChartMetric, psi: &TestFunction, q: &[f64], mode: IntegrandMode) -> Result<Self> {
        psi.check_dim(metric.dim())?;
        if mode == IntegrandMode::Exact {
            if !metric.is_flat() {
                return Err(Error::Unsupported(format!(
                    "exact integrand mode needs a flat model (got {})",
                    metric.kind().name()
                )));
            }
            if !psi.has_continuation() {
                return Err(Error::Unsupported(format!("{} has no holomorphic continuation", psi.name())));
            }
        }
        let base = BaseGeometry::new(metric, q)?;
        let normal = psi.jet(q)?.to_normal(&base.frame.frame, &base.curvature.christoffel);
        Ok(JtEvaluator {
            psi: psi.clone(),
            base,
            normal,
            mode,
        })
    }

    pub fn base(&self) -> &BaseGeometry {
        &self.base
    }

    pub fn normal_jet(&self) -> &PsiJet {
        &self.normal
    }

    pub fn psi_value(&self) -> Complex64 {
        self.normal.value
    }

    /// `ψ∘π∘Φ_i` times the normalized Wick pairing, at frame momentum `p`.
    pub fn integrand(&self, p: &[f64]) -> Result<Complex64> {
        match self.mode {
            IntegrandMode::Taylor => {
                let norm = (2.0 * PI).powf(self.base.dim() as f64 / 2.0);
                let d = bks_density_wick(&self.base, p, 1.0)?;
                Ok(psi_flow_taylor(&self.normal, p) * (d.value / norm))
            }
            IntegrandMode::Exact => {
                let z: Vec<Complex64> = self.base.q.iter().zip(p).map(|(q, p)| Complex64::new(*q, *p)).collect();
                self.psi
                    .continue_complex(&z)
                    .ok_or_else(|| Error::Unsupported(format!("{} has no holomorphic continuation", self.psi.name())))
            }
        }
    }

    /// `j_t^r(q)`, checked by node doubling.
    pub fn jt(&self, cfg: &QuadratureConfig) -> Result<Complex64> {
        cfg.validate()?;
        let rp = r_prime(&self.base, cfg.r);
        if cfg.r > rp {
            return Err(Error::ValidityRadius { r: cfg.r, r_prime: rp });
        }
        let n = self.base.dim();
        let s = cfg.t * cfg.hbar;
        let run = |nodes| integrate_ball(n, cfg.r, s, cfg.scheme, nodes, |p| self.integrand(p));
        let coarse = run(cfg.nodes_per_axis)?;
        let fine = run(2 * cfg.nodes_per_axis)?;
        if (fine - coarse).norm() > cfg.tolerance * fine.norm().max(1.0) {
            return Err(Error::QuadratureNonConvergence {
                coarse: coarse.norm(),
                fine: fine.norm(),
            });
        }
        Ok(fine)
    }

    /// `(a0, a1) = (ψ(q), −(ħ/2)(Δψ − Sψ/6))` with Δ from the normal-coordinate Hessian.
    pub fn coefficients(&self, hbar: f64) -> (Complex64, Complex64) {
        let a0 = self.normal.value;
        let a1 = -0.5 * hbar * (self.normal.laplacian() - a0 * (self.base.scalar() / 6.0));
        (a0, a1)
    }
}

pub fn jt_quadrature(metric: &ChartMetric, psi: &TestFunction, q: &[f64], cfg: &QuadratureConfig) -> Result<Complex64> {
    JtEvaluator::new(metric, psi, q, cfg.mode)?.jt(cfg)
}

/// Closed form of `j_t^r(q)` for Fourier data on flat models, including the
/// finite-ball factor when `r` is given.
pub fn jt_exact_model(
    metric: &ChartMetric,
    psi: &TestFunction,
    q: &[f64],
    t: f64,
    hbar: f64,
    r: Option<f64>,
) -> Result<Complex64> {
    if !metric.is_flat() {
        return Err(Error::Unsupported(format!(
            "closed-form model needs a flat metric (got {})",
            metric.kind().name()
        )));
    }
    if !(t > 0.0 && hbar > 0.0) {
        return Err(Error::InvalidInput(format!("t and hbar must be positive (got {t}, {hbar})")));
    }
    if let Some(r) = r {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("r must be positive (got {r})")));
        }
    }
    psi.check_dim(metric.dim())?;
    let n = metric.dim();
    let s = t * hbar;
    match psi {
        TestFunction::Constant(c) => Ok(c * ball_factor(n, 0.0, s, r)),
        TestFunction::FourierMode { k } => {
            let kappa = k.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
            Ok(psi.eval(q) * ball_factor(n, kappa, s, r))
        }
        TestFunction::Combination(parts) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, f) in parts {
                acc += a * jt_exact_model(metric, f, q, t, hbar, r)?;
            }
            Ok(acc)
        }
        other => Err(Error::Unsupported(format!("closed-form model needs Fourier data (got {})", other.name()))),
    }
}

/// `(2πs)^{−n/2} ∫_{B(r)} e^{−κ p₁} e^{−|p|²/2s} dⁿp`.
fn ball_factor(n: usize, kappa: f64, s: f64, r: Option<f64>) -> f64 {
    let full = (0.5 * kappa * kappa * s).exp();
    let Some(r) = r else { return full };
    let rs = (2.0 * s).sqrt();
    if n == 1 {
        return full * 0.5 * (erf((r + kappa * s) / rs) + erf((r - kappa * s) / rs));
    }
    // integrate the shifted Gaussian along the k-direction against the
    // probability that the remaining n−1 coordinates stay inside the ball
    let m = (n - 1) as f64;
    let panels = ((40.0 * r / s.sqrt()).ceil() as usize).clamp(400, 20_000);
    let inner = rules::composite_legendre(-PI / 2.0, PI / 2.0, panels, 16, |th| {
        let u = r * th.sin();
        let du = r * th.cos();
        let rest = (r * r - u * u).max(0.0) / s;
        let shifted = (-(u + kappa * s).powi(2) / (2.0 * s)).exp();
        shifted * gamma_lr(0.5 * m, 0.5 * rest) * du
    });
    full * inner / (2.0 * PI * s).sqrt()
}

/// Laplace coefficients at `q` together with the quadrature value at `cfg.t`.
pub fn laplace_expansion(
    metric: &ChartMetric,
    psi: &TestFunction,
    q: &[f64],
    cfg: &QuadratureConfig,
) -> Result<ExpansionResult> {
    let ev = JtEvaluator::new(metric, psi, q, cfg.mode)?;
    let (a0, a1) = ev.coefficients(cfg.hbar);
    let jt = ev.jt(cfg)?;
    Ok(ExpansionResult {
        a0,
        a1,
        t_used: cfg.t,
        jt_numeric: jt,
        residual: (jt - a0 - a1 * cfg.t).norm(),
    })
}
