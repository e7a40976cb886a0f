use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::ChartMetric;
use crate::half_forms::BaseGeometry;

use super::rules::{composite_legendre, gauss_legendre};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMass {
    /// `∫_{r0<|p|<r} |f| e^{−E/tħ} dⁿp` in the fibre at `q`.
    pub tail: f64,
    /// Hölder-split bound `C e^{−(1/tħ − 1)ρ²/2}`.
    pub bound: f64,
    /// `C = ∫_{r0<|p|<r} |f| e^{−|p|²/2} dⁿp`.
    pub holder_constant: f64,
}

/// Tail of the Gaussian-weighted fibre integral over the annulus `r0 < |p| < r`.
///
/// `f` receives momenta in orthonormal-frame components, so `E = |p|²/2`;
/// the chart fibre measure contributes `√det g(q)`.
pub fn tail_mass<F>(metric: &ChartMetric, q: &[f64], r0: f64, r: f64, t: f64, hbar: f64, f: F) -> Result<TailMass>
where
    F: Fn(&[f64]) -> f64,
{
    if !(r0 > 0.0 && r0 < r) {
        return Err(Error::InvalidInput(format!("tail needs 0 < r0 < r (got r0 = {r0}, r = {r})")));
    }
    if !(t > 0.0 && hbar > 0.0) {
        return Err(Error::InvalidInput(format!("t and hbar must be positive (got {t}, {hbar})")));
    }
    let n = metric.dim();
    if n > 3 {
        return Err(Error::Unsupported(format!("tail quadrature supports n <= 3 (got {n})")));
    }
    let vol = if metric.is_flat() {
        metric.domain().check(q, 0.0)?;
        metric.checked(q)?;
        1.0
    } else {
        BaseGeometry::new(metric, q)?.sqrt_det_g
    };
    let s = t * hbar;
    let tail = vol * annulus(n, r0, r, s, &f);
    let c = vol * annulus(n, r0, r, 1.0, &f);
    let rho = if s <= 1.0 { r0 } else { r };
    Ok(TailMass {
        tail,
        bound: c * (-(1.0 / s - 1.0) * rho * rho / 2.0).exp(),
        holder_constant: c,
    })
}

/// `∫_{r0<|p|<r} |f(p)| e^{−|p|²/2s} dⁿp` with radial panels graded away from `r0`.
fn annulus<F: Fn(&[f64]) -> f64>(n: usize, r0: f64, r: f64, s: f64, f: &F) -> f64 {
    let mut acc = 0.0;
    let mut a = r0;
    // first panel resolves the decay scale s/r0 of the Gaussian at the inner edge
    let mut width = (s / r0).min(s.sqrt()).min(r - r0) / 4.0;
    while a < r {
        let b = (a + width).min(r);
        acc += composite_legendre(a, b, 1, 16, |rho| {
            rho.powi(n as i32 - 1) * sphere_average(n, rho, f) * (-rho * rho / (2.0 * s)).exp()
        });
        a = b;
        width *= 1.5;
        // beyond the Gaussian's reach further panels are negligible
        if (-(a * a - r0 * r0) / (2.0 * s)).exp() < 1e-30 {
            break;
        }
    }
    acc
}

/// `∫_{S^{n−1}} |f(ρω)| dω`.
fn sphere_average<F: Fn(&[f64]) -> f64>(n: usize, rho: f64, f: &F) -> f64 {
    match n {
        1 => f(&[rho]).abs() + f(&[-rho]).abs(),
        2 => {
            let m = 64;
            (0..m)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 / m as f64;
                    f(&[rho * a.cos(), rho * a.sin()]).abs()
                })
                .sum::<f64>()
                * 2.0
                * PI
                / m as f64
        }
        _ => {
            let rule = gauss_legendre(16);
            let m = 32;
            let mut acc = 0.0;
            for (c, w) in rule.nodes.iter().zip(&rule.weights) {
                let sn = (1.0 - c * c).sqrt();
                for j in 0..m {
                    let a = 2.0 * PI * j as f64 / m as f64;
                    acc += w * f(&[rho * sn * a.cos(), rho * sn * a.sin(), rho * c]).abs();
                }
            }
            acc * 2.0 * PI / m as f64
        }
    }
}
