//! Chart metrics, finite-difference curvature and normal coordinates.

mod curvature;
mod metric;
mod normal;

pub use curvature::{christoffel, curvature, Christoffel, CurvaturePack};
pub use metric::{ChartDomain, ChartMetric, MetricFn, MetricJet, MetricKind, MAX_CONDITION};
pub use normal::{
    exp_map, normal_coords_det_g, normal_coords_det_g_with, normal_frame, radial_volume_profile, NormalFrame,
};

pub(crate) use metric::invert;
