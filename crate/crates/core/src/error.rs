use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} is outside the chart domain (stencil reach {reach})")]
    Domain { point: Vec<f64>, reach: f64 },

    #[error("metric is singular at {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("metric condition number {condition:.3e} exceeds 1e8 at {point:?}")]
    IllConditioned { point: Vec<f64>, condition: f64 },

    #[error("trajectory left the chart at sigma = {sigma} (x = {point:?})")]
    ChartExit { sigma: f64, point: Vec<f64> },

    #[error("step size {step:e} underflows")]
    StepSizeUnderflow { step: f64 },

    #[error("implicit substep did not converge after {iterations} iterations (residual {residual:e})")]
    ImplicitSolve { iterations: usize, residual: f64 },

    #[error("|R_jk p^j p^k| = {value} is outside the validity region (< 3)")]
    OutOfValidity { value: f64 },

    #[error("cutoff radius r = {r} exceeds the validity radius r' = {r_prime}")]
    ValidityRadius { r: f64, r_prime: f64 },

    #[error("quadrature did not converge under node doubling: {coarse} vs {fine}")]
    QuadratureNonConvergence { coarse: f64, fine: f64 },

    #[error("Richardson extrapolation did not converge: estimate {estimate}, level spread {spread:e}")]
    ExtrapolationNonConvergence { estimate: f64, spread: f64 },

    #[error("BKS pairing is degenerate: transversality determinant {det:e}")]
    DegeneratePairing { det: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Input that failed validation before any computation ran.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. } | Error::InvalidInput(_) | Error::Unsupported(_)
        )
    }
}
