use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::test_function::TestFunction;

use super::rules::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceRow {
    pub cutoff: f64,
    /// `∫_{−R}^{R} ψ(q + σp) e^{ip²/2σ} dp`.
    pub value: Complex64,
    /// `∫_{−R}^{R} |ψ(q + σp)| dp`, the absolute integral.
    pub abs_integral: f64,
}

/// Partial values of the real-time fibre integral on the circle for an
/// increasing list of symmetric cutoffs.
pub fn real_time_divergence_demo(psi: &TestFunction, q: f64, sigma: f64, cutoffs: &[f64]) -> Result<Vec<DivergenceRow>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma must be positive (got {sigma})")));
    }
    psi.check_dim(1)?;
    if cutoffs.windows(2).any(|w| !(w[0] < w[1])) || cutoffs.first().map_or(false, |c| !(*c > 0.0)) {
        return Err(Error::InvalidInput("cutoffs must be positive and increasing".into()));
    }
    let kmax = match psi {
        TestFunction::FourierMode { k } => k[0].unsigned_abs() as f64,
        TestFunction::Constant(_) => 0.0,
        _ => 10.0,
    };
    let rule = gauss_legendre(16);
    let integrand = |p: f64| {
        let v = psi.eval(&[q + sigma * p]);
        (v * Complex64::from_polar(1.0, p * p / (2.0 * sigma)), v.norm())
    };
    let mut out = Vec::with_capacity(cutoffs.len());
    let mut value = Complex64::new(0.0, 0.0);
    let mut abs_int = 0.0;
    let mut done = 0.0f64;
    for &cut in cutoffs {
        // both half-lines [done, cut] and [−cut, −done], panels shorter than
        // one local oscillation
        let mut a = done;
        while a < cut {
            let freq = a / sigma + kmax * sigma + 1.0;
            let b = (a + 1.0f64.min(2.0 / freq)).min(cut);
            let h = b - a;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let p = a + 0.5 * h * (x + 1.0);
                let (vp, ap) = integrand(p);
                let (vm, am) = integrand(-p);
                value += (vp + vm) * (0.5 * h * w);
                abs_int += (ap + am) * 0.5 * h * w;
            }
            a = b;
        }
        done = cut;
        out.push(DivergenceRow {
            cutoff: cut,
            value,
            abs_integral: abs_int,
        });
    }
    Ok(out)
}
