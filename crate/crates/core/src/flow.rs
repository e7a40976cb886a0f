//! Geodesic flow of `E = ½ g^{jk}(x) p_j p_k` on `T*M`.
//!
//! The integrator is the generalized (implicit) leapfrog composed with the
//! symmetric triple-jump weights, giving a 4th-order symplectic, time
//! reversible map. The tangent map is propagated by linearizing each substep
//! exactly, so the returned jacobian is the derivative of the numerical flow
//! itself.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{ChartMetric, MetricJet};

/// Steps per unit flow time used when no count is given.
pub const DEFAULT_STEPS_PER_UNIT: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Self {
        PhasePoint { x, p }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Canonical 1-form `θ = p_j dx^j` applied to a tangent vector `(dx, dp)`.
    pub fn theta(&self, dx: &[f64]) -> f64 {
        self.p.iter().zip(dx).map(|(p, v)| p * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub point: PhasePoint,
    /// Tangent map of the flow in block order `(x; p)`.
    pub jacobian: DMatrix<f64>,
    pub sigma: f64,
    pub energy0: f64,
}

impl FlowState {
    /// `∂x(σ)/∂p(0)`, the block whose determinant detects conjugate points.
    pub fn position_momentum_block(&self) -> DMatrix<f64> {
        let n = self.point.dim();
        self.jacobian.view((0, n), (n, n)).into_owned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Number of composition steps; `0` means `ceil(1000·|σ|)`.
    pub steps: usize,
    pub track_jacobian: bool,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            steps: 0,
            track_jacobian: true,
            tolerance: 1e-13,
            max_iterations: 50,
        }
    }
}

impl FlowOptions {
    pub fn steps_for(&self, sigma: f64) -> usize {
        if self.steps > 0 {
            self.steps
        } else {
            default_steps(sigma)
        }
    }
}

pub fn default_steps(sigma: f64) -> usize {
    ((DEFAULT_STEPS_PER_UNIT * sigma.abs()).ceil() as usize).max(1)
}

/// `E = ½ g^{jk}(x) p_j p_k`.
pub fn kinetic_energy(metric: &ChartMetric, z: &PhasePoint) -> Result<f64> {
    let (_, g_inv) = metric.checked(&z.x)?;
    Ok(energy_with(&g_inv, &z.p))
}

fn energy_with(g_inv: &DMatrix<f64>, p: &[f64]) -> f64 {
    let p = DVector::from_column_slice(p);
    0.5 * (p.transpose() * g_inv * &p)[(0, 0)]
}

/// Fiber rescaling `N_t(x, p) = (x, t·p)`.
pub fn rescale(z: &PhasePoint, t: f64) -> PhasePoint {
    PhasePoint {
        x: z.x.clone(),
        p: z.p.iter().map(|v| t * v).collect(),
    }
}

/// Time-`σ` flow with the default step count and tangent-map tracking.
pub fn flow(metric: &ChartMetric, z0: &PhasePoint, sigma: f64, steps: usize) -> Result<FlowState> {
    let opts = FlowOptions {
        steps,
        ..FlowOptions::default()
    };
    flow_with(metric, z0, sigma, &opts, |_| {})
}

/// Time-`σ` flow calling `observe` on the initial state and after every step.
pub fn flow_with<F>(metric: &ChartMetric, z0: &PhasePoint, sigma: f64, opts: &FlowOptions, mut observe: F) -> Result<FlowState>
where
    F: FnMut(&FlowState),
{
    let integ = Integrator::new(metric, opts);
    let mut state = integ.initial(z0)?;
    observe(&state);
    if sigma == 0.0 {
        return Ok(state);
    }
    if !sigma.is_finite() {
        return Err(Error::InvalidInput(format!("flow time must be finite (got {sigma})")));
    }
    let steps = opts.steps_for(sigma);
    let h = sigma / steps as f64;
    if h.abs() < 1e-14 * sigma.abs().max(1.0) {
        return Err(Error::StepSizeUnderflow { step: h });
    }
    let mut jet = integ.jet(&state.point.x)?;
    for k in 0..steps {
        let (next, next_jet) = integ.step(&state, &jet, h)?;
        state = next;
        jet = next_jet;
        // avoid accumulated drift in the reported time
        state.sigma = if k + 1 == steps { sigma } else { (k + 1) as f64 * h };
        observe(&state);
    }
    Ok(state)
}

/// `det(∂x(σ)/∂p(0))`; vanishes exactly when `(Φ_σ)_*` of the vertical
/// space meets the vertical space at the endpoint.
pub fn transversality_det(metric: &ChartMetric, z: &PhasePoint, sigma: f64, steps: usize) -> Result<f64> {
    let st = flow(metric, z, sigma, steps)?;
    Ok(st.position_momentum_block().determinant())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatePoint {
    pub sigma: f64,
    pub state: FlowState,
}

/// Zeros of `transversality_det` on `(0, σ_max]`, located by bisection to
/// `tol` in flow time. Each bracket is refined by single composition steps
/// from the state at the left end of the bracketing step.
pub fn conjugate_points(
    metric: &ChartMetric,
    z: &PhasePoint,
    sigma_max: f64,
    steps: usize,
    tol: f64,
) -> Result<Vec<ConjugatePoint>> {
    if !(sigma_max > 0.0) {
        return Err(Error::InvalidInput("conjugate search needs sigma_max > 0".into()));
    }
    let opts = FlowOptions {
        steps,
        ..FlowOptions::default()
    };
    let integ = Integrator::new(metric, &opts);
    let mut brackets: Vec<(FlowState, f64, f64)> = Vec::new();
    let mut prev: Option<(FlowState, f64)> = None;
    flow_with(metric, z, sigma_max, &opts, |st| {
        let det = st.position_momentum_block().determinant();
        if let Some((p, pdet)) = &prev {
            if p.sigma > 0.0 && (pdet.signum() != det.signum() || det == 0.0) && *pdet != 0.0 {
                brackets.push((p.clone(), st.sigma - p.sigma, *pdet));
            }
        }
        prev = Some((st.clone(), det));
    })?;

    let mut out = Vec::with_capacity(brackets.len());
    for (left, width, left_det) in brackets {
        let mut lo = 0.0;
        let mut hi = width;
        let jet = integ.jet(&left.point.x)?;
        let eval = |s: f64| -> Result<FlowState> {
            let (mut st, _) = integ.step(&left, &jet, s)?;
            st.sigma = left.sigma + s;
            Ok(st)
        };
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let det = eval(mid)?.position_momentum_block().determinant();
            if det == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if det.signum() == left_det.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        out.push(ConjugatePoint {
            sigma: left.sigma + s,
            state: eval(s)?,
        });
    }
    Ok(out)
}

struct Integrator<'a> {
    metric: &'a ChartMetric,
    opts: FlowOptions,
    reach: f64,
}

// Triple-jump composition weights for a symmetric 4th-order method.
const CBRT2: f64 = 1.259_921_049_894_873_2;
const W1: f64 = 1.0 / (2.0 - CBRT2);
const W0: f64 = -CBRT2 / (2.0 - CBRT2);

impl<'a> Integrator<'a> {
    fn new(metric: &'a ChartMetric, opts: &FlowOptions) -> Self {
        Integrator {
            metric,
            opts: *opts,
            reach: metric.fd().reach(),
        }
    }

    fn initial(&self, z0: &PhasePoint) -> Result<FlowState> {
        let n = self.metric.dim();
        if z0.x.len() != n || z0.p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z0.x.len().max(z0.p.len()),
            });
        }
        self.metric.domain().check(&z0.x, self.reach)?;
        let (_, g_inv) = self.metric.checked(&z0.x)?;
        Ok(FlowState {
            point: z0.clone(),
            jacobian: DMatrix::identity(2 * n, 2 * n),
            sigma: 0.0,
            energy0: energy_with(&g_inv, &z0.p),
        })
    }

    fn jet(&self, x: &[f64]) -> Result<MetricJet> {
        self.metric.jet(x, self.opts.track_jacobian)
    }

    fn inside(&self, x: &[f64], sigma: f64) -> Result<()> {
        if self.metric.domain().contains(x, self.reach) {
            Ok(())
        } else {
            Err(Error::ChartExit {
                sigma,
                point: x.to_vec(),
            })
        }
    }

    /// One triple-jump step of size `h`; returns the new state and the jet at
    /// the new position.
    fn step(&self, st: &FlowState, jet: &MetricJet, h: f64) -> Result<(FlowState, MetricJet)> {
        let mut x = DVector::from_column_slice(&st.point.x);
        let mut p = DVector::from_column_slice(&st.point.p);
        let mut d = if self.opts.track_jacobian {
            Some(st.jacobian.clone())
        } else {
            None
        };
        let mut cur = jet.clone();
        for w in [W1, W0, W1] {
            let (nx, np, njet) = self.leapfrog(&x, &p, &cur, w * h, d.as_mut(), st.sigma)?;
            x = nx;
            p = np;
            cur = njet;
        }
        Ok((
            FlowState {
                point: PhasePoint {
                    x: x.iter().copied().collect(),
                    p: p.iter().copied().collect(),
                },
                jacobian: d.unwrap_or_else(|| st.jacobian.clone()),
                sigma: st.sigma + h,
                energy0: st.energy0,
            },
            cur,
        ))
    }

    /// Generalized leapfrog:
    /// `p½ = p − h/2 ∂_xH(x, p½)`,
    /// `x' = x + h/2 (∂_pH(x, p½) + ∂_pH(x', p½))`,
    /// `p' = p½ − h/2 ∂_xH(x', p½)`.
    #[allow(clippy::type_complexity)]
    fn leapfrog(
        &self,
        x: &DVector<f64>,
        p: &DVector<f64>,
        jx: &MetricJet,
        h: f64,
        d: Option<&mut DMatrix<f64>>,
        sigma: f64,
    ) -> Result<(DVector<f64>, DVector<f64>, MetricJet)> {
        let hh = 0.5 * h;
        let tol = self.opts.tolerance;

        let mut p_half = p.clone();
        let mut converged = false;
        let mut residual = f64::INFINITY;
        for _ in 0..self.opts.max_iterations {
            let next = p - force(jx, &p_half) * hh;
            residual = (&next - &p_half).amax();
            p_half = next;
            if residual <= tol * p_half.amax().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ImplicitSolve {
                iterations: self.opts.max_iterations,
                residual,
            });
        }

        let v_x = &jx.g_inv * &p_half;
        let mut x_new = x + &v_x * h;
        converged = false;
        for _ in 0..self.opts.max_iterations {
            self.inside(x_new.as_slice(), sigma)?;
            let g = self.metric.eval(x_new.as_slice());
            let g_inv = crate::geometry::invert(&g, x_new.as_slice())?;
            let next = x + (&v_x + g_inv * &p_half) * hh;
            residual = (&next - &x_new).amax();
            x_new = next;
            if residual <= tol * x_new.amax().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ImplicitSolve {
                iterations: self.opts.max_iterations,
                residual,
            });
        }
        self.inside(x_new.as_slice(), sigma)?;
        let jnew = self.jet(x_new.as_slice())?;
        let p_new = &p_half - force(&jnew, &p_half) * hh;

        if let Some(d) = d {
            let n = x.len();
            let id = DMatrix::<f64>::identity(n, n);
            let m_x = mixed(jx, &p_half);
            let m_new = mixed(&jnew, &p_half);
            let hxx_x = hessian_x(jx, &p_half);
            let hxx_new = hessian_x(&jnew, &p_half);

            let dx = d.rows(0, n).into_owned();
            let dp = d.rows(n, n).into_owned();

            let a1 = &id + &m_x * hh;
            let rhs = &dp - &hxx_x * &dx * hh;
            let dp_half = solve(&a1, &rhs)?;

            let a2 = &id - m_new.transpose() * hh;
            let rhs = (&id + m_x.transpose() * hh) * &dx + (&jx.g_inv + &jnew.g_inv) * &dp_half * hh;
            let dx_new = solve(&a2, &rhs)?;

            let dp_new = &dp_half - (&hxx_new * &dx_new + &m_new * &dp_half) * hh;
            d.rows_mut(0, n).copy_from(&dx_new);
            d.rows_mut(n, n).copy_from(&dp_new);
        }
        Ok((x_new, p_new, jnew))
    }
}

/// `∂_x H = −½ vᵀ (∂_i g) v` with `v = g⁻¹ p`.
fn force(jet: &MetricJet, p: &DVector<f64>) -> DVector<f64> {
    let v = &jet.g_inv * p;
    DVector::from_iterator(jet.dg.len(), jet.dg.iter().map(|dgi| -0.5 * v.dot(&(dgi * &v))))
}

/// `M[i][k] = ∂²H/∂x_i∂p_k = −(g⁻¹ ∂_i g v)_k`.
fn mixed(jet: &MetricJet, p: &DVector<f64>) -> DMatrix<f64> {
    let n = p.len();
    let v = &jet.g_inv * p;
    let mut m = DMatrix::zeros(n, n);
    for (i, dgi) in jet.dg.iter().enumerate() {
        let row = -(&jet.g_inv * (dgi * &v));
        m.set_row(i, &row.transpose());
    }
    m
}

/// `∂²H/∂x_i∂x_j = (∂_i g v)ᵀ g⁻¹ (∂_j g v) − ½ vᵀ ∂_i∂_j g v`.
fn hessian_x(jet: &MetricJet, p: &DVector<f64>) -> DMatrix<f64> {
    let n = p.len();
    let v = &jet.g_inv * p;
    let a: Vec<DVector<f64>> = jet.dg.iter().map(|dgi| dgi * &v).collect();
    let mut hxx = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let val = a[i].dot(&(&jet.g_inv * &a[j])) - 0.5 * v.dot(&(&jet.d2g[i][j] * &v));
            hxx[(i, j)] = val;
            hxx[(j, i)] = val;
        }
    }
    hxx
}

fn solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::ImplicitSolve {
            iterations: 0,
            residual: f64::NAN,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn symplectic_defect(d: &DMatrix<f64>) -> f64 {
        let n = d.nrows() / 2;
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = 1.0;
            j[(n + i, i)] = -1.0;
        }
        (d.transpose() * &j * d - j).amax()
    }

    #[test]
    fn kinetic_energy_examples() {
        let t = ChartMetric::flat_torus(2).unwrap();
        assert_eq!(kinetic_energy(&t, &PhasePoint::new(vec![0.0, 0.0], vec![3.0, 4.0])).unwrap(), 12.5);
        let s = ChartMetric::round_sphere(1.0).unwrap();
        assert_eq!(kinetic_energy(&s, &PhasePoint::new(vec![1.0, 0.0], vec![0.0, 0.0])).unwrap(), 0.0);
        let e = kinetic_energy(&s, &PhasePoint::new(vec![PI / 2.0, 0.0], vec![0.0, 2.0])).unwrap();
        assert!((e - 2.0).abs() < 1e-15);
    }

    #[test]
    fn flat_flow_is_straight_line() {
        let t = ChartMetric::flat_torus(2).unwrap();
        let z = PhasePoint::new(vec![0.1, 0.2], vec![0.7, -1.3]);
        let st = flow(&t, &z, 1.7, 0).unwrap();
        assert!((st.point.x[0] - (0.1 + 1.7 * 0.7)).abs() < 1e-12);
        assert!((st.point.x[1] - (0.2 - 1.7 * 1.3)).abs() < 1e-12);
        assert_eq!(st.point.p, z.p);
        let block = st.position_momentum_block();
        assert!((block.determinant() - 1.7 * 1.7).abs() < 1e-9);
    }

    #[test]
    fn zero_time_is_identity() {
        let s = ChartMetric::round_sphere(1.0).unwrap();
        let z = PhasePoint::new(vec![1.0, 0.3], vec![0.2, 0.5]);
        let st = flow(&s, &z, 0.0, 10).unwrap();
        assert_eq!(st.point, z);
        assert_eq!(st.jacobian, DMatrix::identity(4, 4));
        assert_eq!(transversality_det(&s, &z, 0.0, 10).unwrap(), 0.0);
    }

    #[test]
    fn great_circle_closes_after_two_pi() {
        let s = ChartMetric::round_sphere(1.0).unwrap();
        let z = PhasePoint::new(vec![PI / 2.0, 0.3], vec![0.0, 1.0]);
        let st = flow(&s, &z, 2.0 * PI, 0).unwrap();
        assert!((st.point.x[0] - z.x[0]).abs() < 1e-8);
        assert!((st.point.x[1] - (z.x[1] + 2.0 * PI)).abs() < 1e-8);
        assert!((st.point.p[0] - z.p[0]).abs() < 1e-8);
        assert!((st.point.p[1] - z.p[1]).abs() < 1e-8);
    }

    #[test]
    fn tilted_great_circle_closes() {
        // not along the equator: exercises θ dynamics
        let s = ChartMetric::round_sphere(1.0).unwrap();
        let th = 1.2f64;
        let z = PhasePoint::new(vec![th, 0.0], vec![0.3, 0.5 * th.sin()]);
        let e = kinetic_energy(&s, &z).unwrap();
        let speed = (2.0 * e).sqrt();
        // a great circle through a point at colatitude 1.2 has max colatitude
        // deviation < 1.2 so it stays away from the caps
        let st = flow(&s, &z, 2.0 * PI / speed, 0).unwrap();
        assert!((st.point.x[0] - th).abs() < 1e-8);
        assert!((st.point.p[0] - z.p[0]).abs() < 1e-8);
        assert!((kinetic_energy(&s, &st.point).unwrap() - e).abs() < 1e-10 * 6.3);
    }

    #[test]
    fn energy_conservation_and_symplecticity() {
        let h = ChartMetric::hyperbolic_halfplane();
        let z = PhasePoint::new(vec![0.0, 1.0], vec![0.4, 0.3]);
        let sigma = 3.0;
        let mut worst: f64 = 0.0;
        let st = flow_with(&h, &z, sigma, &FlowOptions::default(), |s| {
            let e = kinetic_energy(&h, &s.point).unwrap();
            worst = worst.max((e - s.energy0).abs());
        })
        .unwrap();
        assert!(worst <= 1e-10 * sigma * st.energy0.max(1.0), "{worst}");
        assert!(symplectic_defect(&st.jacobian) < 1e-8);
        assert!((st.jacobian.determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn reversibility() {
        let m = ChartMetric::surface_of_revolution(vec![1.0, 0.1, 0.4], (-1.5, 1.5)).unwrap();
        let z = PhasePoint::new(vec![0.2, 0.1], vec![0.5, 0.6]);
        let fwd = flow(&m, &z, 1.5, 0).unwrap();
        let back = flow(&m, &fwd.point, -1.5, 0).unwrap();
        for (a, b) in back.point.x.iter().chain(&back.point.p).zip(z.x.iter().chain(&z.p)) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn tangent_map_matches_finite_difference_of_trajectories() {
        let s = ChartMetric::round_sphere(1.0).unwrap();
        let z = PhasePoint::new(vec![1.1, 0.2], vec![0.3, 0.6]);
        let st = flow(&s, &z, 1.3, 0).unwrap();
        let eps = 1e-6;
        for col in 0..4 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            if col < 2 {
                zp.x[col] += eps;
                zm.x[col] -= eps;
            } else {
                zp.p[col - 2] += eps;
                zm.p[col - 2] -= eps;
            }
            let a = flow(&s, &zp, 1.3, 0).unwrap().point;
            let b = flow(&s, &zm, 1.3, 0).unwrap().point;
            let fd: Vec<f64> = a.x.iter().chain(&a.p).zip(b.x.iter().chain(&b.p)).map(|(u, v)| (u - v) / (2.0 * eps)).collect();
            for (row, v) in fd.iter().enumerate() {
                assert!((st.jacobian[(row, col)] - v).abs() < 1e-6, "({row},{col})");
            }
        }
    }

    #[test]
    fn small_time_block_ratio() {
        let s = ChartMetric::round_sphere(1.0).unwrap();
        let q = vec![0.9, 0.0];
        let z = PhasePoint::new(q.clone(), vec![0.4, 0.2]);
        let (_, g_inv) = s.checked(&q).unwrap();
        let rel = |sigma: f64| {
            let det = transversality_det(&s, &z, sigma, 10).unwrap();
            (det / sigma.powi(2) / g_inv.determinant() - 1.0).abs()
        };
        let (a, b) = (rel(1e-3), rel(1e-4));
        assert!(b < 1e-4, "{b}");
        // first-order approach to the limit
        assert!((a / b - 10.0).abs() < 0.5, "{a} {b}");
    }

    #[test]
    fn sphere_first_conjugate_point_at_pi() {
        let s = ChartMetric::round_sphere(1.0).unwrap();
        let z = PhasePoint::new(vec![PI / 2.0, 0.0], vec![0.0, 1.0]);
        let pts = conjugate_points(&s, &z, 4.0, 0, 1e-9).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].sigma - PI).abs() < 1e-6, "{}", pts[0].sigma);
    }

    #[test]
    fn chart_exit_reports_time() {
        let s = ChartMetric::round_sphere(1.0).unwrap();
        // meridian through the north cap
        let z = PhasePoint::new(vec![0.5, 0.0], vec![-1.0, 0.0]);
        match flow(&s, &z, 1.0, 0) {
            Err(Error::ChartExit { sigma, .. }) => assert!(sigma > 0.45 && sigma < 0.5, "{sigma}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rescaling_identities_on_flat_torus() {
        let t = ChartMetric::flat_torus(2).unwrap();
        let z = PhasePoint::new(vec![0.3, 0.4], vec![1.1, -0.2]);
        let (tt, sigma) = (0.5, 0.3);
        let lhs = rescale(&flow(&t, &z, tt * sigma, 0).unwrap().point, tt);
        let rhs = flow(&t, &rescale(&z, tt), sigma, 0).unwrap().point;
        for (a, b) in lhs.x.iter().chain(&lhs.p).zip(rhs.x.iter().chain(&rhs.p)) {
            assert!((a - b).abs() < 1e-9);
        }
        let e = kinetic_energy(&t, &z).unwrap();
        assert!((kinetic_energy(&t, &rescale(&z, 3.0)).unwrap() - 9.0 * e).abs() < 1e-12);
        assert_eq!(rescale(&z, 1.0), z);
    }

    #[test]
    fn zero_steps_with_nonzero_time_uses_default() {
        let t = ChartMetric::circle();
        let st = flow(&t, &PhasePoint::new(vec![0.0], vec![1.0]), 0.5, 0).unwrap();
        assert!((st.point.x[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn underflowing_step_is_rejected() {
        let t = ChartMetric::circle();
        let r = flow(&t, &PhasePoint::new(vec![0.0], vec![1.0]), 1e-3, usize::MAX / 4);
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })));
    }
}
