//! BKS half-form pairing densities.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flow::{self, FlowOptions, PhasePoint};
use crate::geometry::{curvature, normal_frame, radial_volume_profile, ChartMetric, CurvaturePack, NormalFrame};

/// Determinants below this make the real-time pairing degenerate.
pub const DEGENERATE_DET: f64 = 1e-10;

/// `(2πħ)^{-n} det(g(x))^{-1/2}`.
pub fn liouville_density(metric: &ChartMetric, x: &[f64], hbar: f64) -> Result<f64> {
    check_hbar(hbar)?;
    metric.domain().check(x, 0.0)?;
    let (g, _) = metric.checked(x)?;
    let n = metric.dim() as i32;
    Ok((2.0 * PI * hbar).powi(-n) / g.determinant().sqrt())
}

/// Curvature and normal frame at a base point, with the Ricci tensor pulled
/// into the frame so fibre vectors can be contracted with the identity.
#[derive(Debug, Clone)]
pub struct BaseGeometry {
    pub q: Vec<f64>,
    pub frame: NormalFrame,
    pub curvature: CurvaturePack,
    pub ricci_frame: DMatrix<f64>,
    pub sqrt_det_g: f64,
    /// `C` in `remainder_bound = (2πħ)^{n/2} C |p|³`, when estimated.
    pub remainder_constant: Option<f64>,
}

impl BaseGeometry {
    pub fn new(metric: &ChartMetric, q: &[f64]) -> Result<Self> {
        let frame = normal_frame(metric, q)?;
        let curv = curvature(metric, q)?;
        let ricci_frame = frame.pull_tensor(&curv.ricci);
        let sqrt_det_g = metric.eval(q).determinant().sqrt();
        Ok(BaseGeometry {
            q: q.to_vec(),
            frame,
            curvature: curv,
            ricci_frame,
            sqrt_det_g,
            remainder_constant: if metric.is_flat() { Some(0.0) } else { None },
        })
    }

    /// Estimates the remainder constant from `√det g` in normal coordinates
    /// along a fixed set of radial directions out to `s_max`.
    pub fn with_remainder(mut self, metric: &ChartMetric, s_max: f64, steps: usize) -> Result<Self> {
        if metric.is_flat() {
            self.remainder_constant = Some(0.0);
            return Ok(self);
        }
        let steps = steps.max(8);
        let mut worst: f64 = 0.0;
        for u in radial_directions(metric.dim()) {
            let prof = radial_volume_profile(metric, &self.frame, &u, s_max, steps)?;
            let h = s_max / steps as f64;
            for w in prof.windows(5) {
                let d3 = (w[4].1 - 2.0 * w[3].1 + 2.0 * w[1].1 - w[0].1) / (2.0 * h * h * h);
                worst = worst.max(d3.abs());
            }
        }
        self.remainder_constant = Some(worst / 6.0);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn scalar(&self) -> f64 {
        self.curvature.scalar
    }

    /// `R_jk p^j p^k` for frame components `p`.
    pub fn ricci_quadratic(&self, p: &[f64]) -> f64 {
        let v = DVector::from_column_slice(p);
        v.dot(&(&self.ricci_frame * &v))
    }

    /// Operator norm of Ricci in the orthonormal frame.
    pub fn ricci_norm(&self) -> f64 {
        let eig = self.ricci_frame.clone().symmetric_eigenvalues();
        eig.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn radial_directions(n: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..8)
            .map(|k| {
                let a = k as f64 * PI / 4.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for a in 0..n {
                for s in [1.0, -1.0] {
                    let mut u = vec![0.0; n];
                    u[a] = s;
                    out.push(u);
                }
            }
            let c = 1.0 / (n as f64).sqrt();
            for mask in 0..(1usize << n.min(3)) {
                let mut u = vec![0.0; n];
                for (a, ua) in u.iter_mut().enumerate().take(3) {
                    *ua = if mask >> a & 1 == 1 { -c } else { c };
                }
                if n > 3 {
                    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                    u.iter_mut().for_each(|v| *v /= norm);
                }
                out.push(u);
            }
            out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingDensity {
    pub value: Complex64,
    /// Truncation order in `|p|`.
    pub order: u32,
    /// `None` when no remainder constant was estimated for the base point.
    pub remainder_bound: Option<f64>,
}

fn check_validity(base: &BaseGeometry, p: &[f64]) -> Result<f64> {
    if p.len() != base.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            got: p.len(),
        });
    }
    let rpp = base.ricci_quadratic(p);
    if rpp.abs() >= 3.0 {
        return Err(Error::OutOfValidity { value: rpp });
    }
    Ok(rpp)
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("hbar must be positive (got {hbar})")))
    }
}

/// `√det g(exp_q p) ≈ 1 − R_jk p^j p^k / 6` in normal coordinates.
pub fn pulled_back_volume_taylor(base: &BaseGeometry, p: &[f64]) -> Result<f64> {
    let rpp = check_validity(base, p)?;
    Ok(1.0 - rpp / 6.0)
}

/// Wick-rotated pairing `(2πħ)^{n/2}(1 + R_jk p^j p^k / 12)`.
pub fn bks_density_wick(base: &BaseGeometry, p: &[f64], hbar: f64) -> Result<PairingDensity> {
    check_hbar(hbar)?;
    let rpp = check_validity(base, p)?;
    let norm = (2.0 * PI * hbar).powf(base.dim() as f64 / 2.0);
    let p_abs = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(PairingDensity {
        value: Complex64::new(norm * (1.0 + rpp / 12.0), 0.0),
        order: 2,
        remainder_bound: base.remainder_constant.map(|c| norm * c * p_abs.powi(3)),
    })
}

/// Real-time pairing `(√dvol, √Φ_σ* dvol)` at `z`.
///
/// The square of the value is `(2πħ)ⁿ i⁻ⁿ √(det g(x₀) det g(x_σ)) det B` with
/// `B = ∂x_σ/∂p₀`. The root is principal as `σ → 0⁺` and is continued in `σ`
/// by a further `−π/2` of phase each time `det B` changes sign.
pub fn bks_density_real(metric: &ChartMetric, z: &PhasePoint, sigma: f64, hbar: f64, steps: usize) -> Result<Complex64> {
    check_hbar(hbar)?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput(format!("real-time pairing needs sigma > 0 (got {sigma})")));
    }
    let n = metric.dim();
    let opts = FlowOptions {
        steps,
        ..FlowOptions::default()
    };
    let mut crossings = 0u32;
    let mut last_sign = 0.0f64;
    let end = flow::flow_with(metric, z, sigma, &opts, |st| {
        if st.sigma == 0.0 {
            return;
        }
        let d = st.position_momentum_block().determinant();
        let s = d.signum();
        if last_sign != 0.0 && s != last_sign && d != 0.0 {
            crossings += 1;
        }
        if d != 0.0 {
            last_sign = s;
        }
    })?;
    let det_b = end.position_momentum_block().determinant();
    if det_b.abs() < DEGENERATE_DET {
        return Err(Error::DegeneratePairing { det: det_b });
    }
    let g0 = metric.eval(&z.x).determinant();
    let g1 = metric.eval(&end.point.x).determinant();
    let modulus = ((2.0 * PI * hbar).powi(n as i32) * (g0 * g1).sqrt() * det_b.abs()).sqrt();
    let phase = -(n as f64) * PI / 4.0 - crossings as f64 * PI / 2.0;
    Ok(Complex64::from_polar(modulus, phase))
}
