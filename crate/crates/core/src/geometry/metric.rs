use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fd::FdConfig;

/// Metrics with a condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e8;

pub type MetricFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricKind {
    FlatTorus,
    Circle,
    RoundSphere { radius: f64 },
    HyperbolicHalfPlane,
    /// `du² + f(u)² dv²` with `f(u) = Σ profile[i] uⁱ`.
    SurfaceOfRevolution { profile: Vec<f64> },
    Custom,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::FlatTorus => "flat_torus",
            MetricKind::Circle => "circle",
            MetricKind::RoundSphere { .. } => "round_sphere",
            MetricKind::HyperbolicHalfPlane => "hyperbolic_halfplane",
            MetricKind::SurfaceOfRevolution { .. } => "surface_of_revolution",
            MetricKind::Custom => "custom",
        }
    }
}

/// Axis-aligned chart box. Periodic axes are treated as the universal
/// cover: points outside `[lo, hi]` along them are admissible.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub periodic: Vec<bool>,
}

impl ChartDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, periodic: Vec<bool>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != periodic.len() {
            return Err(Error::InvalidInput("domain bounds have mismatched lengths".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidInput(format!("empty domain box {lo:?}..{hi:?}")));
        }
        Ok(ChartDomain { lo, hi, periodic })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// True when `x` lies at least `reach` inside every non-periodic face.
    pub fn contains(&self, x: &[f64], reach: f64) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, &xi)| {
                xi.is_finite() && (self.periodic[i] || (xi >= self.lo[i] + reach && xi <= self.hi[i] - reach))
            })
    }

    pub fn check(&self, x: &[f64], reach: f64) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if self.contains(x, reach) {
            Ok(())
        } else {
            Err(Error::Domain {
                point: x.to_vec(),
                reach,
            })
        }
    }

    pub fn centre(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

/// A Riemannian metric on one coordinate chart, sampled pointwise.
#[derive(Clone)]
pub struct ChartMetric {
    dim: usize,
    kind: MetricKind,
    domain: ChartDomain,
    fd: FdConfig,
    g: Arc<MetricFn>,
}

impl fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartMetric")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("fd", &self.fd)
            .finish_non_exhaustive()
    }
}

/// Pointwise metric data: `g`, its inverse and finite-difference derivatives.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `dg[i] = ∂_i g`.
    pub dg: Vec<DMatrix<f64>>,
    /// `d2g[i][j] = ∂_i ∂_j g`; empty unless requested.
    pub d2g: Vec<Vec<DMatrix<f64>>>,
}

impl ChartMetric {
    pub fn custom<F>(dim: usize, domain: ChartDomain, g: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if dim == 0 || domain.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: domain.dim(),
            });
        }
        Ok(ChartMetric {
            dim,
            kind: MetricKind::Custom,
            domain,
            fd: FdConfig::default(),
            g: Arc::new(g),
        })
    }

    pub fn circle() -> Self {
        ChartMetric {
            dim: 1,
            kind: MetricKind::Circle,
            domain: ChartDomain {
                lo: vec![0.0],
                hi: vec![2.0 * PI],
                periodic: vec![true],
            },
            fd: FdConfig::default(),
            g: Arc::new(|_| DMatrix::identity(1, 1)),
        }
    }

    pub fn flat_torus(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("flat_torus needs dim >= 1".into()));
        }
        Ok(ChartMetric {
            dim,
            kind: MetricKind::FlatTorus,
            domain: ChartDomain {
                lo: vec![0.0; dim],
                hi: vec![2.0 * PI; dim],
                periodic: vec![true; dim],
            },
            fd: FdConfig::default(),
            g: Arc::new(move |_| DMatrix::identity(dim, dim)),
        })
    }

    /// Round sphere of radius `radius` in polar coordinates `(θ, φ)`. The
    /// chart excludes polar caps of angular radius `0.01`.
    pub fn round_sphere(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("sphere radius must be positive (got {radius})")));
        }
        let r2 = radius * radius;
        Ok(ChartMetric {
            dim: 2,
            kind: MetricKind::RoundSphere { radius },
            domain: ChartDomain {
                lo: vec![0.01, 0.0],
                hi: vec![PI - 0.01, 2.0 * PI],
                periodic: vec![false, true],
            },
            fd: FdConfig::default(),
            g: Arc::new(move |x| {
                let s = x[0].sin();
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![r2, r2 * s * s]))
            }),
        })
    }

    /// Upper half-plane `(dx² + dy²)/y²`.
    pub fn hyperbolic_halfplane() -> Self {
        ChartMetric {
            dim: 2,
            kind: MetricKind::HyperbolicHalfPlane,
            domain: ChartDomain {
                lo: vec![-50.0, 0.01],
                hi: vec![50.0, 100.0],
                periodic: vec![false, false],
            },
            fd: FdConfig::default(),
            g: Arc::new(|x| {
                let w = 1.0 / (x[1] * x[1]);
                DMatrix::from_diagonal_element(2, 2, w)
            }),
        }
    }

    /// Surface of revolution `du² + f(u)² dv²` on `u ∈ [u_lo, u_hi]`, `v` periodic.
    pub fn surface_of_revolution(profile: Vec<f64>, u_range: (f64, f64)) -> Result<Self> {
        if profile.is_empty() {
            return Err(Error::InvalidInput("profile needs at least one coefficient".into()));
        }
        let domain = ChartDomain::new(vec![u_range.0, 0.0], vec![u_range.1, 2.0 * PI], vec![false, true])?;
        let samples = 64;
        for i in 0..=samples {
            let u = u_range.0 + (u_range.1 - u_range.0) * i as f64 / samples as f64;
            let f = eval_poly(&profile, u);
            if !(f > 0.0) {
                return Err(Error::InvalidInput(format!("profile is not positive at u = {u} (f = {f})")));
            }
        }
        let coeffs = profile.clone();
        Ok(ChartMetric {
            dim: 2,
            kind: MetricKind::SurfaceOfRevolution { profile },
            domain,
            fd: FdConfig::default(),
            g: Arc::new(move |x| {
                let f = eval_poly(&coeffs, x[0]);
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, f * f]))
            }),
        })
    }

    pub fn with_fd(mut self, fd: FdConfig) -> Self {
        self.fd = fd;
        self
    }

    pub fn with_domain(mut self, domain: ChartDomain) -> Result<Self> {
        if domain.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: domain.dim(),
            });
        }
        self.domain = domain;
        Ok(self)
    }

    /// Same chart, metric multiplied by the constant `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = Arc::clone(&self.g);
        ChartMetric {
            dim: self.dim,
            kind: MetricKind::Custom,
            domain: self.domain.clone(),
            fd: self.fd,
            g: Arc::new(move |x| inner(x) * c),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn fd(&self) -> FdConfig {
        self.fd
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, MetricKind::FlatTorus | MetricKind::Circle)
    }

    /// Raw metric matrix at `x`, symmetrized.
    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let g = (self.g)(x);
        (&g + g.transpose()) * 0.5
    }

    /// Metric and its inverse after checking positivity and conditioning.
    pub fn checked(&self, x: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let g = self.eval(x);
        if g.nrows() != self.dim || g.ncols() != self.dim || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMetric { point: x.to_vec() });
        }
        let eig = SymmetricEigen::new(g.clone());
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        if !(min > 0.0) {
            return Err(Error::SingularMetric { point: x.to_vec() });
        }
        let condition = max / min;
        if condition > MAX_CONDITION {
            return Err(Error::IllConditioned {
                point: x.to_vec(),
                condition,
            });
        }
        let g_inv = invert(&g, x)?;
        Ok((g, g_inv))
    }

    /// Metric jet without the conditioning check (used inside integrators
    /// once the base point has been validated).
    pub fn jet(&self, x: &[f64], second: bool) -> Result<MetricJet> {
        let n = self.dim;
        let h = self.fd.step;
        let g = self.eval(x);
        let g_inv = invert(&g, x)?;
        let mut probe = x.to_vec();
        let w1 = self.fd.first_weights();
        let dg: Vec<DMatrix<f64>> = (0..n)
            .map(|i| {
                let mut acc = DMatrix::zeros(n, n);
                for (k, w) in w1.iter().enumerate() {
                    let s = (k + 1) as f64 * h;
                    probe[i] = x[i] + s;
                    let gp = self.eval(&probe);
                    probe[i] = x[i] - s;
                    let gm = self.eval(&probe);
                    acc += (gp - gm) * *w;
                }
                probe[i] = x[i];
                acc / h
            })
            .collect();
        let d2g = if second { self.second_derivatives(x, &g) } else { Vec::new() };
        Ok(MetricJet { g, g_inv, dg, d2g })
    }

    fn second_derivatives(&self, x: &[f64], g0: &DMatrix<f64>) -> Vec<Vec<DMatrix<f64>>> {
        let n = self.dim;
        let h = self.fd.step;
        let w1 = self.fd.first_weights();
        let (c0, w2) = self.fd.second_weights();
        let mut probe = x.to_vec();
        let mut out = vec![vec![DMatrix::zeros(n, n); n]; n];
        for i in 0..n {
            let mut acc = g0 * c0;
            for (k, w) in w2.iter().enumerate() {
                let s = (k + 1) as f64 * h;
                probe[i] = x[i] + s;
                acc += self.eval(&probe) * *w;
                probe[i] = x[i] - s;
                acc += self.eval(&probe) * *w;
            }
            probe[i] = x[i];
            out[i][i] = acc / (h * h);
            for j in (i + 1)..n {
                let mut acc = DMatrix::zeros(n, n);
                for (a, wa) in w1.iter().enumerate() {
                    for (b, wb) in w1.iter().enumerate() {
                        let sa = (a + 1) as f64 * h;
                        let sb = (b + 1) as f64 * h;
                        let mut corner = |di: f64, dj: f64| {
                            probe[i] = x[i] + di;
                            probe[j] = x[j] + dj;
                            self.eval(&probe)
                        };
                        let v = corner(sa, sb) - corner(sa, -sb) - corner(-sa, sb) + corner(-sa, -sb);
                        acc += v * (wa * wb);
                    }
                }
                probe[i] = x[i];
                probe[j] = x[j];
                let d = acc / (h * h);
                out[j][i] = d.clone();
                out[i][j] = d;
            }
        }
        out
    }
}

pub(crate) fn invert(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
    g.clone()
        .cholesky()
        .map(|c| {
            let inv = c.inverse();
            (&inv + inv.transpose()) * 0.5
        })
        .ok_or_else(|| Error::SingularMetric { point: x.to_vec() })
}

pub(crate) fn eval_poly(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}
