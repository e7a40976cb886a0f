use nalgebra::DMatrix;

use super::metric::ChartMetric;
use crate::error::Result;

/// Christoffel symbols `Γ^i_jk` stored densely, index order `(i, j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    fn zeros(n: usize) -> Self {
        Christoffel {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePack {
    pub christoffel: Christoffel,
    /// Covariant Ricci tensor `R_jk` in chart coordinates.
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
}

/// `Γ^i_jk = ½ g^{il}(∂_j g_lk + ∂_k g_jl − ∂_l g_jk)`, symmetrized in `(j, k)`.
pub fn christoffel(metric: &ChartMetric, x: &[f64]) -> Result<Christoffel> {
    metric.domain().check(x, metric.fd().reach())?;
    metric.checked(x)?;
    christoffel_unchecked(metric, x)
}

pub(crate) fn christoffel_unchecked(metric: &ChartMetric, x: &[f64]) -> Result<Christoffel> {
    let n = metric.dim();
    let jet = metric.jet(x, false)?;
    let mut gamma = Christoffel::zeros(n);
    // lowered symbols Γ_ljk
    let lowered = |l: usize, j: usize, k: usize| 0.5 * (jet.dg[j][(l, k)] + jet.dg[k][(j, l)] - jet.dg[l][(j, k)]);
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut v = 0.0;
                for l in 0..n {
                    v += jet.g_inv[(i, l)] * (lowered(l, j, k) + lowered(l, k, j)) * 0.5;
                }
                gamma.set(i, j, k, v);
                gamma.set(i, k, j, v);
            }
        }
    }
    Ok(gamma)
}

/// Christoffel symbols, Ricci tensor and scalar curvature at `x`. The
/// derivatives of `Γ` are nested central differences, so the stencil reaches
/// twice as far as for `christoffel`.
pub fn curvature(metric: &ChartMetric, x: &[f64]) -> Result<CurvaturePack> {
    let fd = metric.fd();
    metric.domain().check(x, 2.0 * fd.reach())?;
    let (_, g_inv) = metric.checked(x)?;
    let n = metric.dim();
    let gamma = christoffel_unchecked(metric, x)?;

    // dgamma[m] = ∂_m Γ
    let h = fd.step;
    let mut probe = x.to_vec();
    let mut dgamma = Vec::with_capacity(n);
    for m in 0..n {
        let mut acc = vec![0.0; n * n * n];
        for (k, w) in fd.first_weights().iter().enumerate() {
            let s = (k + 1) as f64 * h;
            probe[m] = x[m] + s;
            let gp = christoffel_unchecked(metric, &probe)?;
            probe[m] = x[m] - s;
            let gm = christoffel_unchecked(metric, &probe)?;
            for (a, (p, q)) in acc.iter_mut().zip(gp.as_slice().iter().zip(gm.as_slice())) {
                *a += w * (p - q);
            }
        }
        probe[m] = x[m];
        dgamma.push(Christoffel {
            n,
            data: acc.into_iter().map(|v| v / h).collect(),
        });
    }

    // R_jl = ∂_i Γ^i_lj − ∂_l Γ^i_ij + Γ^i_im Γ^m_lj − Γ^i_lm Γ^m_ij
    let mut ricci = DMatrix::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            let mut v = 0.0;
            for i in 0..n {
                v += dgamma[i].get(i, l, j) - dgamma[l].get(i, i, j);
                for m in 0..n {
                    v += gamma.get(i, i, m) * gamma.get(m, l, j) - gamma.get(i, l, m) * gamma.get(m, i, j);
                }
            }
            ricci[(j, l)] = v;
        }
    }
    let ricci = (&ricci + ricci.transpose()) * 0.5;
    let scalar = g_inv.component_mul(&ricci).sum();
    Ok(CurvaturePack {
        christoffel: gamma,
        ricci,
        scalar,
    })
}
