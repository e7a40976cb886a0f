//! Test functions ψ on a chart, with derivatives and (where available)
//! holomorphic continuation.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fd::FdConfig;
use crate::geometry::Christoffel;

pub type PsiFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// One monomial `coeff · Π x_i^{powers[i]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub powers: Vec<u32>,
}

#[derive(Clone)]
pub enum TestFunction {
    Constant(Complex64),
    /// `e^{i k·x}`.
    FourierMode { k: Vec<i64> },
    /// `P_l^{|m|}(cos θ) e^{imφ}` in polar coordinates `(θ, φ)`, unnormalized.
    SphericalHarmonic { l: u32, m: i32 },
    Polynomial { terms: Vec<Monomial> },
    Combination(Vec<(Complex64, TestFunction)>),
    /// Black-box function; derivatives by central differences.
    Custom { name: String, f: Arc<PsiFn>, fd: FdConfig },
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Constant(c) => write!(f, "Constant({c})"),
            TestFunction::FourierMode { k } => write!(f, "FourierMode({k:?})"),
            TestFunction::SphericalHarmonic { l, m } => write!(f, "SphericalHarmonic(l={l}, m={m})"),
            TestFunction::Polynomial { terms } => f.debug_tuple("Polynomial").field(terms).finish(),
            TestFunction::Combination(parts) => f.debug_tuple("Combination").field(parts).finish(),
            TestFunction::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Value, gradient and Hessian of ψ in some coordinate system.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiJet {
    pub value: Complex64,
    pub grad: DVector<Complex64>,
    pub hess: DMatrix<Complex64>,
}

impl PsiJet {
    fn zeros(n: usize) -> Self {
        PsiJet {
            value: Complex64::new(0.0, 0.0),
            grad: DVector::zeros(n),
            hess: DMatrix::zeros(n, n),
        }
    }

    fn axpy(&mut self, a: Complex64, other: &PsiJet) {
        self.value += a * other.value;
        self.grad += &other.grad * a;
        self.hess += &other.hess * a;
    }

    /// Trace of the Hessian.
    pub fn laplacian(&self) -> Complex64 {
        self.hess.trace()
    }

    /// Derivatives in normal coordinates at the base point: `eᵀ∇ψ` and
    /// `eᵀ(∂²ψ − Γ^k ∂_kψ)e`.
    pub fn to_normal(&self, frame: &DMatrix<f64>, gamma: &Christoffel) -> PsiJet {
        let n = self.grad.len();
        let e = frame.map(|v| Complex64::new(v, 0.0));
        let mut cov = self.hess.clone();
        for j in 0..n {
            for l in 0..n {
                for k in 0..n {
                    cov[(j, l)] -= self.grad[k] * gamma.get(k, j, l);
                }
            }
        }
        let hess = e.transpose() * cov * &e;
        let hess = (&hess + hess.transpose()) * Complex64::new(0.5, 0.0);
        PsiJet {
            value: self.value,
            grad: e.transpose() * &self.grad,
            hess,
        }
    }
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        TestFunction::Constant(re(c))
    }

    pub fn fourier(k: Vec<i64>) -> Self {
        TestFunction::FourierMode { k }
    }

    pub fn custom<F>(name: &str, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        TestFunction::Custom {
            name: name.to_string(),
            f: Arc::new(f),
            fd: FdConfig::new(6, 1e-3).expect("valid stencil"),
        }
    }

    pub fn name(&self) -> String {
        match self {
            TestFunction::Constant(c) => format!("const({c})"),
            TestFunction::FourierMode { k } => format!("fourier_mode({})", join(k)),
            TestFunction::SphericalHarmonic { l, m } => format!("spherical_harmonic({l},{m})"),
            TestFunction::Polynomial { .. } => "polynomial".into(),
            TestFunction::Combination(_) => "combination".into(),
            TestFunction::Custom { name, .. } => format!("custom({name})"),
        }
    }

    /// Required chart dimension, if the function fixes one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            TestFunction::Constant(_) | TestFunction::Custom { .. } => None,
            TestFunction::FourierMode { k } => Some(k.len()),
            TestFunction::SphericalHarmonic { .. } => Some(2),
            TestFunction::Polynomial { terms } => terms.first().map(|t| t.powers.len()),
            TestFunction::Combination(parts) => parts.iter().find_map(|(_, f)| f.dim()),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if let TestFunction::SphericalHarmonic { l, m } = self {
            if m.unsigned_abs() > *l {
                return Err(Error::InvalidInput(format!("spherical harmonic needs |m| <= l (got l={l}, m={m})")));
            }
        }
        if let TestFunction::Polynomial { terms } = self {
            if terms.iter().any(|t| t.powers.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: terms.iter().map(|t| t.powers.len()).find(|&l| l != n).unwrap_or(n),
                });
            }
        }
        if let TestFunction::Combination(parts) = self {
            for (_, f) in parts {
                f.check_dim(n)?;
            }
        }
        match self.dim() {
            Some(d) if d != n => Err(Error::DimensionMismatch { expected: n, got: d }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::FourierMode { k } => {
                let phase: f64 = k.iter().zip(x).map(|(k, x)| *k as f64 * x).sum();
                Complex64::from_polar(1.0, phase)
            }
            TestFunction::SphericalHarmonic { l, m } => {
                let (p, _) = legendre_with_derivative(*l, m.unsigned_abs(), x[0].cos());
                p * Complex64::from_polar(1.0, *m as f64 * x[1])
            }
            TestFunction::Polynomial { terms } => terms
                .iter()
                .map(|t| t.coeff * t.powers.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product::<f64>())
                .sum(),
            TestFunction::Combination(parts) => parts.iter().map(|(a, f)| a * f.eval(x)).sum(),
            TestFunction::Custom { f, .. } => f(x),
        }
    }

    /// Chart derivatives at `x`.
    pub fn jet(&self, x: &[f64]) -> Result<PsiJet> {
        let n = x.len();
        self.check_dim(n)?;
        let mut out = PsiJet::zeros(n);
        match self {
            TestFunction::Constant(c) => out.value = *c,
            TestFunction::FourierMode { k } => {
                let v = self.eval(x);
                out.value = v;
                for a in 0..n {
                    out.grad[a] = I * k[a] as f64 * v;
                    for b in 0..n {
                        out.hess[(a, b)] = -v * (k[a] * k[b]) as f64;
                    }
                }
            }
            TestFunction::SphericalHarmonic { l, m } => {
                let (l, mu, mf) = (*l, m.unsigned_abs(), *m as f64);
                let (th, ph) = (x[0], x[1]);
                let (s, c) = th.sin_cos();
                if s.abs() < 1e-12 {
                    return Err(Error::Domain {
                        point: x.to_vec(),
                        reach: 0.0,
                    });
                }
                let (p, dp) = legendre_with_derivative(l, mu, c);
                let lf = l as f64;
                let d2p = (2.0 * c * dp - (lf * (lf + 1.0) - (mu * mu) as f64 / (s * s)) * p) / (s * s);
                let e = Complex64::from_polar(1.0, mf * ph);
                let p_th = -s * dp;
                let p_thth = s * s * d2p - c * dp;
                out.value = e * p;
                out.grad[0] = e * p_th;
                out.grad[1] = I * mf * e * p;
                out.hess[(0, 0)] = e * p_thth;
                out.hess[(0, 1)] = I * mf * e * p_th;
                out.hess[(1, 0)] = out.hess[(0, 1)];
                out.hess[(1, 1)] = -mf * mf * e * p;
            }
            TestFunction::Polynomial { terms } => {
                for t in terms {
                    let mono = |pw: &[i64]| -> f64 {
                        pw.iter().zip(x).map(|(&e, &v)| if e < 0 { 0.0 } else { v.powi(e as i32) }).product()
                    };
                    let base: Vec<i64> = t.powers.iter().map(|&e| e as i64).collect();
                    out.value += t.coeff * mono(&base);
                    for a in 0..n {
                        let mut pa = base.clone();
                        let ca = pa[a] as f64;
                        pa[a] -= 1;
                        out.grad[a] += t.coeff * ca * mono(&pa);
                        for b in 0..n {
                            let mut pb = pa.clone();
                            let cb = pb[b] as f64;
                            pb[b] -= 1;
                            out.hess[(a, b)] += t.coeff * ca * cb * mono(&pb);
                        }
                    }
                }
            }
            TestFunction::Combination(parts) => {
                for (a, f) in parts {
                    out.axpy(*a, &f.jet(x)?);
                }
            }
            TestFunction::Custom { f, fd, .. } => {
                out.value = f(x);
                let mut probe = x.to_vec();
                let h = fd.step;
                for a in 0..n {
                    let mut line = |s: f64| {
                        probe[a] = x[a] + s;
                        let v = f(&probe);
                        probe[a] = x[a];
                        v
                    };
                    out.grad[a] = cfd(fd, &mut line, false);
                    out.hess[(a, a)] = cfd(fd, &mut line, true);
                    for b in (a + 1)..n {
                        // mixed partial from products of first-difference stencils
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (i, wi) in fd.first_weights().iter().enumerate() {
                            for (j, wj) in fd.first_weights().iter().enumerate() {
                                let (si, sj) = ((i + 1) as f64 * h, (j + 1) as f64 * h);
                                let mut corner = |di: f64, dj: f64| {
                                    probe[a] = x[a] + di;
                                    probe[b] = x[b] + dj;
                                    let v = f(&probe);
                                    probe[a] = x[a];
                                    probe[b] = x[b];
                                    v
                                };
                                acc += (corner(si, sj) - corner(si, -sj) - corner(-si, sj) + corner(-si, -sj)) * (wi * wj);
                            }
                        }
                        out.hess[(a, b)] = acc / (h * h);
                        out.hess[(b, a)] = out.hess[(a, b)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Holomorphic extension `ψ_ℂ(z)`, when ψ is entire in the chart
    /// coordinates.
    pub fn continue_complex(&self, z: &[Complex64]) -> Option<Complex64> {
        match self {
            TestFunction::Constant(c) => Some(*c),
            TestFunction::FourierMode { k } => {
                let arg: Complex64 = k.iter().zip(z).map(|(k, z)| *k as f64 * z).sum();
                Some((I * arg).exp())
            }
            TestFunction::Polynomial { terms } => Some(
                terms
                    .iter()
                    .map(|t| t.coeff * t.powers.iter().zip(z).map(|(&e, v)| v.powu(e)).product::<Complex64>())
                    .sum(),
            ),
            TestFunction::Combination(parts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, f) in parts {
                    acc += a * f.continue_complex(z)?;
                }
                Some(acc)
            }
            TestFunction::SphericalHarmonic { .. } | TestFunction::Custom { .. } => None,
        }
    }

    pub fn has_continuation(&self) -> bool {
        match self {
            TestFunction::SphericalHarmonic { .. } | TestFunction::Custom { .. } => false,
            TestFunction::Combination(parts) => parts.iter().all(|(_, f)| f.has_continuation()),
            _ => true,
        }
    }
}

fn cfd<F: FnMut(f64) -> Complex64>(fd: &FdConfig, f: &mut F, second: bool) -> Complex64 {
    let h = fd.step;
    if second {
        let (c0, ws) = fd.second_weights();
        let mut acc = f(0.0) * c0;
        for (i, w) in ws.iter().enumerate() {
            let s = (i + 1) as f64 * h;
            acc += (f(s) + f(-s)) * *w;
        }
        acc / (h * h)
    } else {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, w) in fd.first_weights().iter().enumerate() {
            let s = (i + 1) as f64 * h;
            acc += (f(s) - f(-s)) * *w;
        }
        acc / h
    }
}

/// `P_l^m(c)` (Condon–Shortley phase) and `dP_l^m/dc`, for `0 ≤ m ≤ l`, `|c| < 1`.
pub fn legendre_with_derivative(l: u32, m: u32, c: f64) -> (f64, f64) {
    let s2 = (1.0 - c * c).max(0.0);
    // P_m^m
    let mut pmm = 1.0;
    let s = s2.sqrt();
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * s;
        fact += 2.0;
    }
    let (mut prev, mut cur) = (0.0, pmm);
    for ll in (m + 1)..=l {
        let next = ((2 * ll - 1) as f64 * c * cur - (ll + m - 1) as f64 * prev) / (ll - m) as f64;
        prev = cur;
        cur = next;
    }
    // (c² − 1) P' = l c P_l − (l + m) P_{l−1}
    let p_lm1 = if l > m { prev } else { 0.0 };
    let dp = (l as f64 * c * cur - (l + m) as f64 * p_lm1) / (c * c - 1.0);
    (cur, dp)
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses `const[:c]`, `fourier:k1,k2,..`, `ylm:l,m` and `poly:c*x0^a*x1^b+...`.
impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let ints = |r: &str| -> Result<Vec<i64>> {
            r.split(',')
                .map(|v| v.trim().parse::<i64>().map_err(|_| Error::InvalidInput(format!("bad integer '{v}' in '{s}'"))))
                .collect()
        };
        match head {
            "const" | "constant" => {
                let c = if rest.is_empty() {
                    1.0
                } else {
                    rest.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad constant '{rest}'")))?
                };
                Ok(TestFunction::constant(c))
            }
            "fourier" | "fourier_mode" => {
                let k = ints(rest)?;
                if k.is_empty() {
                    return Err(Error::InvalidInput("fourier mode needs at least one wavenumber".into()));
                }
                Ok(TestFunction::FourierMode { k })
            }
            "ylm" | "spherical_harmonic" => {
                let v = ints(rest)?;
                if v.len() != 2 || v[0] < 0 {
                    return Err(Error::InvalidInput(format!("spherical harmonic needs 'l,m' (got '{rest}')")));
                }
                let f = TestFunction::SphericalHarmonic {
                    l: v[0] as u32,
                    m: v[1] as i32,
                };
                f.check_dim(2)?;
                Ok(f)
            }
            "poly" | "polynomial" => parse_poly(rest),
            _ => Err(Error::InvalidInput(format!("unknown test function '{head}'"))),
        }
    }
}

fn parse_poly(src: &str) -> Result<TestFunction> {
    let bad = |m: &str| Error::InvalidInput(format!("bad polynomial '{src}': {m}"));
    let mut raw: Vec<(f64, Vec<(usize, u32)>)> = Vec::new();
    let normalized = src.replace(' ', "").replace('-', "+-");
    for term in normalized.split('+').filter(|t| !t.is_empty()) {
        let mut coeff = 1.0;
        let mut pw = Vec::new();
        for factor in term.split('*') {
            let (neg, factor) = match factor.strip_prefix('-') {
                Some(f) => (true, f),
                None => (false, factor),
            };
            if neg {
                coeff = -coeff;
            }
            if factor.is_empty() {
                continue;
            }
            if let Some(var) = factor.strip_prefix('x') {
                let (idx, exp) = var.split_once('^').unwrap_or((var, "1"));
                let idx: usize = idx.parse().map_err(|_| bad("variable index"))?;
                let exp: u32 = exp.parse().map_err(|_| bad("exponent"))?;
                pw.push((idx, exp));
            } else {
                coeff *= factor.parse::<f64>().map_err(|_| bad("coefficient"))?;
            }
        }
        raw.push((coeff, pw));
    }
    if raw.is_empty() {
        return Err(bad("no terms"));
    }
    let n = raw.iter().flat_map(|(_, p)| p.iter().map(|(i, _)| i + 1)).max().unwrap_or(1);
    let terms = raw
        .into_iter()
        .map(|(c, pw)| {
            let mut powers = vec![0u32; n];
            for (i, e) in pw {
                powers[i] += e;
            }
            Monomial { coeff: re(c), powers }
        })
        .collect();
    Ok(TestFunction::Polynomial { terms })
}

impl TestFunction {
    /// Pads polynomial exponent vectors to `n` variables.
    pub fn with_dim(self, n: usize) -> Self {
        match self {
            TestFunction::Polynomial { terms } => TestFunction::Polynomial {
                terms: terms
                    .into_iter()
                    .map(|mut t| {
                        t.powers.resize(n.max(t.powers.len()), 0);
                        t
                    })
                    .collect(),
            },
            TestFunction::Combination(parts) => {
                TestFunction::Combination(parts.into_iter().map(|(a, f)| (a, f.with_dim(n))).collect())
            }
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{christoffel, normal_frame, ChartMetric};
    use std::f64::consts::PI;

    fn fd_jet(f: &TestFunction, x: &[f64]) -> PsiJet {
        let g = f.clone();
        TestFunction::custom("probe", move |y| g.eval(y)).jet(x).unwrap()
    }

    fn close(a: &PsiJet, b: &PsiJet, tol: f64) {
        assert!((a.value - b.value).norm() < tol);
        assert!((&a.grad - &b.grad).norm() < tol, "{} vs {}", a.grad, b.grad);
        assert!((&a.hess - &b.hess).norm() < tol, "{} vs {}", a.hess, b.hess);
    }

    #[test]
    fn analytic_jets_agree_with_differences() {
        let x = [0.9, 0.4];
        for f in [
            TestFunction::fourier(vec![2, -1]),
            TestFunction::SphericalHarmonic { l: 1, m: 1 },
            TestFunction::SphericalHarmonic { l: 3, m: -2 },
            TestFunction::SphericalHarmonic { l: 2, m: 0 },
            "poly:1.5*x0^2*x1-x1^3+2".parse().unwrap(),
        ] {
            close(&f.jet(&x).unwrap(), &fd_jet(&f, &x), 1e-7);
        }
    }

    #[test]
    fn legendre_low_orders() {
        let c: f64 = 0.3;
        let s = (1.0 - c * c).sqrt();
        let (p, dp) = legendre_with_derivative(1, 1, c);
        assert!((p + s).abs() < 1e-15);
        assert!((dp - c / s).abs() < 1e-14);
        let (p, dp) = legendre_with_derivative(2, 0, c);
        assert!((p - 0.5 * (3.0 * c * c - 1.0)).abs() < 1e-15);
        assert!((dp - 3.0 * c).abs() < 1e-14);
    }

    #[test]
    fn spherical_harmonic_is_laplace_eigenfunction() {
        // Δ = ∂θθ + cot θ ∂θ + ∂φφ / sin²θ on the unit sphere
        for (l, m) in [(1u32, 1i32), (2, -1), (3, 2)] {
            let f = TestFunction::SphericalHarmonic { l, m };
            let x = [1.1, 0.3];
            let j = f.jet(&x).unwrap();
            let lap = j.hess[(0, 0)] + j.grad[0] / x[0].tan() + j.hess[(1, 1)] / x[0].sin().powi(2);
            let expect = -((l * (l + 1)) as f64) * j.value;
            assert!((lap - expect).norm() < 1e-12, "l={l} m={m}");
        }
    }

    #[test]
    fn normal_laplacian_on_sphere_matches_eigenvalue() {
        let s = ChartMetric::round_sphere(1.0).unwrap();
        let x = [1.0, 0.2];
        let f = TestFunction::SphericalHarmonic { l: 2, m: 1 };
        let frame = normal_frame(&s, &x).unwrap();
        let gamma = christoffel(&s, &x).unwrap();
        let nj = f.jet(&x).unwrap().to_normal(&frame.frame, &gamma);
        assert!((nj.laplacian() + 6.0 * nj.value).norm() < 1e-9);
    }

    #[test]
    fn continuation_of_fourier_mode() {
        let f = TestFunction::fourier(vec![3]);
        let q = 0.4;
        let p = 0.2;
        let v = f.continue_complex(&[Complex64::new(q, p)]).unwrap();
        let expect = Complex64::from_polar((-3.0 * p).exp(), 3.0 * q);
        assert!((v - expect).norm() < 1e-15);
        assert!(TestFunction::SphericalHarmonic { l: 1, m: 0 }.continue_complex(&[I, I]).is_none());
    }

    #[test]
    fn fourier_taylor_example_sign() {
        // e^{ikq}e^{-kp} = e^{ikq}(1 − kp + k²p²/2 + O(p³))
        let k: f64 = 2.0;
        let p: f64 = 1e-3;
        let exact = (-k * p).exp();
        let taylor = 1.0 - k * p + 0.5 * k * k * p * p;
        assert!((exact - taylor).abs() < 2.0 * (k * p).powi(3));
    }

    #[test]
    fn parse_round_trip() {
        assert!(matches!("const".parse::<TestFunction>().unwrap(), TestFunction::Constant(c) if c == re(1.0)));
        assert!(matches!("fourier:1,-2".parse::<TestFunction>().unwrap(), TestFunction::FourierMode { k } if k == vec![1, -2]));
        assert!("ylm:1,2".parse::<TestFunction>().is_err());
        assert!("bogus".parse::<TestFunction>().is_err());
        let p: TestFunction = "poly:x0^2 - 3*x1".parse().unwrap();
        assert!((p.eval(&[2.0, 1.0]) - re(1.0)).norm() < 1e-15);
        assert!(TestFunction::fourier(vec![1]).check_dim(2).is_err());
        let _ = PI;
    }
}
