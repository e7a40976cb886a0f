//! Central finite-difference stencils.

use crate::error::{Error, Result};

/// Order and step of the central differences used to sample metric jets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub order: usize,
    pub step: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            order: 4,
            step: 1e-3,
        }
    }
}

impl FdConfig {
    pub fn new(order: usize, step: f64) -> Result<Self> {
        if !matches!(order, 2 | 4 | 6) {
            return Err(Error::InvalidInput(format!(
                "fd_order must be 2, 4 or 6 (got {order})"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "fd_step must be positive (got {step})"
            )));
        }
        Ok(FdConfig { order, step })
    }

    /// Number of grid points on either side of the centre.
    pub fn half_width(&self) -> usize {
        self.order / 2
    }

    /// Distance from the centre to the outermost sample of one stencil.
    pub fn reach(&self) -> f64 {
        self.half_width() as f64 * self.step
    }

    /// Weights for offsets `1..=half_width`; the first derivative stencil is
    /// antisymmetric so only the positive side is stored.
    pub fn first_weights(&self) -> &'static [f64] {
        match self.order {
            2 => &[0.5],
            4 => &[2.0 / 3.0, -1.0 / 12.0],
            _ => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        }
    }

    /// Centre weight followed by the symmetric weights for offsets `1..=half_width`.
    pub fn second_weights(&self) -> (f64, &'static [f64]) {
        match self.order {
            2 => (-2.0, &[1.0]),
            4 => (-5.0 / 2.0, &[4.0 / 3.0, -1.0 / 12.0]),
            _ => (-49.0 / 18.0, &[3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0]),
        }
    }

    /// d/ds f(s) at s = 0 for a scalar function of one variable.
    pub fn derivative<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let h = self.step;
        self.first_weights()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let s = (i + 1) as f64 * h;
                w * (f(s) - f(-s))
            })
            .sum::<f64>()
            / h
    }

    /// d²/ds² f(s) at s = 0.
    pub fn second_derivative<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let h = self.step;
        let (c0, ws) = self.second_weights();
        let mut acc = c0 * f(0.0);
        for (i, w) in ws.iter().enumerate() {
            let s = (i + 1) as f64 * h;
            acc += w * (f(s) + f(-s));
        }
        acc / (h * h)
    }
}

/// Componentwise gradient of a vector-valued function `f: R^n -> R^m`
/// (stored as `Vec<f64>`), returning `n` derivative vectors.
pub fn gradient_vec<F>(fd: &FdConfig, x: &[f64], f: F) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let h = fd.step;
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|axis| {
            let mut acc: Option<Vec<f64>> = None;
            for (i, w) in fd.first_weights().iter().enumerate() {
                let s = (i + 1) as f64 * h;
                probe[axis] = x[axis] + s;
                let fp = f(&probe);
                probe[axis] = x[axis] - s;
                let fm = f(&probe);
                let acc = acc.get_or_insert_with(|| vec![0.0; fp.len()]);
                for ((a, p), m) in acc.iter_mut().zip(&fp).zip(&fm) {
                    *a += w * (p - m);
                }
            }
            probe[axis] = x[axis];
            acc.unwrap_or_default().into_iter().map(|v| v / h).collect()
        })
        .collect()
}
