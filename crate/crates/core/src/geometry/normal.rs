use nalgebra::{DMatrix, DVector};

use super::metric::ChartMetric;
use crate::error::{Error, Result};
use crate::flow::{self, FlowOptions, PhasePoint};

/// A `g(q)`-orthonormal basis of `T_qM`, stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFrame {
    pub base: Vec<f64>,
    pub frame: DMatrix<f64>,
}

impl NormalFrame {
    /// Chart components of the tangent vector with frame components `y`.
    pub fn to_chart(&self, y: &[f64]) -> DVector<f64> {
        &self.frame * DVector::from_column_slice(y)
    }

    /// Frame components of a chart covector: `p_a = p(e_a)`.
    pub fn covector_to_frame(&self, p: &[f64]) -> DVector<f64> {
        self.frame.transpose() * DVector::from_column_slice(p)
    }

    /// Transforms a covariant 2-tensor into frame components `eᵀ T e`.
    pub fn pull_tensor(&self, t: &DMatrix<f64>) -> DMatrix<f64> {
        let out = self.frame.transpose() * t * &self.frame;
        (&out + out.transpose()) * 0.5
    }
}

/// Gram–Schmidt of the chart basis against `g(q)`, in ascending index order.
pub fn normal_frame(metric: &ChartMetric, q: &[f64]) -> Result<NormalFrame> {
    metric.domain().check(q, 0.0)?;
    let (g, _) = metric.checked(q)?;
    let n = metric.dim();
    let mut frame = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let mut v = DVector::<f64>::zeros(n);
        v[k] = 1.0;
        // modified Gram–Schmidt against the columns already accepted
        for j in 0..k {
            let e = frame.column(j).into_owned();
            let c = (e.transpose() * &g * &v)[(0, 0)];
            v -= e * c;
        }
        let norm2 = (v.transpose() * &g * &v)[(0, 0)];
        if !(norm2 > 0.0) {
            return Err(Error::SingularMetric { point: q.to_vec() });
        }
        frame.set_column(k, &(v / norm2.sqrt()));
    }
    Ok(NormalFrame {
        base: q.to_vec(),
        frame,
    })
}

/// Geodesic `exp_q(y)` for frame components `y`, with the differential
/// `∂x/∂y` obtained from the flow's tangent map.
pub fn exp_map(metric: &ChartMetric, frame: &NormalFrame, y: &[f64], steps: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = metric.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let q = &frame.base;
    let g = metric.eval(q);
    let ge = &g * &frame.frame;
    let p0 = &ge * DVector::from_column_slice(y);
    let z0 = PhasePoint::new(q.clone(), p0.iter().copied().collect());
    let opts = FlowOptions {
        steps,
        ..FlowOptions::default()
    };
    let state = flow::flow_with(metric, &z0, 1.0, &opts, |_| {})?;
    let block = state.jacobian.view((0, n), (n, n)).into_owned();
    Ok((state.point.x, block * ge))
}

/// `det g` in normal coordinates centred at `q`, evaluated at offset `y`.
pub fn normal_coords_det_g(metric: &ChartMetric, q: &[f64], y: &[f64]) -> Result<f64> {
    let frame = normal_frame(metric, q)?;
    normal_coords_det_g_with(metric, &frame, y, 1000)
}

pub fn normal_coords_det_g_with(metric: &ChartMetric, frame: &NormalFrame, y: &[f64], steps: usize) -> Result<f64> {
    if y.iter().all(|v| *v == 0.0) {
        return Ok(1.0);
    }
    let (x, jac) = exp_map(metric, frame, y, steps)?;
    let g = metric.eval(&x);
    let det_j = jac.determinant();
    Ok(g.determinant() * det_j * det_j)
}

/// `√det g` in normal coordinates along the ray `s ↦ s·u` (unit frame
/// direction `u`), sampled at `s = k·s_max/steps`, `k = 0..=steps`.
///
/// One flow along the unit-speed geodesic gives every radius at once since
/// `x_1(q, s·p) = x_s(q, p)` and `∂x_1/∂p |_{s·p} = (1/s) ∂x_s/∂p |_p`.
pub fn radial_volume_profile(
    metric: &ChartMetric,
    frame: &NormalFrame,
    u: &[f64],
    s_max: f64,
    steps: usize,
) -> Result<Vec<(f64, f64)>> {
    let q = &frame.base;
    let g = metric.eval(q);
    let ge = &g * &frame.frame;
    let p0 = &ge * DVector::from_column_slice(u);
    let z0 = PhasePoint::new(q.clone(), p0.iter().copied().collect());
    let n = metric.dim();
    let opts = FlowOptions {
        steps,
        ..FlowOptions::default()
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut err = None;
    flow::flow_with(metric, &z0, s_max, &opts, |st| {
        if err.is_some() {
            return;
        }
        let s = st.sigma;
        if s == 0.0 {
            out.push((0.0, 1.0));
            return;
        }
        let block = st.jacobian.view((0, n), (n, n)).into_owned() * &ge / s;
        let gx = metric.eval(&st.point.x);
        let det = gx.determinant() * block.determinant().powi(2);
        if det > 0.0 {
            out.push((s, det.sqrt()));
        } else {
            err = Some(Error::SingularMetric { point: st.point.x.clone() });
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
