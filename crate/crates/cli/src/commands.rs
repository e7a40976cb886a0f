use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use wickflow::flow::{self, conjugate_points, kinetic_energy, FlowOptions, PhasePoint};
use wickflow::geometry::{curvature, ChartMetric, MetricKind};
use wickflow::manifold_file::ManifoldFile;
use wickflow::quadrature::{
    laplace_expansion, psi_flow_taylor, r_prime_at, real_time_divergence_demo, tail_mass, IntegrandMode,
    JtEvaluator, QuadratureConfig, Scheme,
};
use wickflow::quantizer::{self, QuantizationReport};
use wickflow::test_function::TestFunction;

use crate::args::{chart_grid, parse_list, parse_t_grid, per_axis_for, random_points};
use crate::output::{cnum, indexed, num, open_out, Csv, ExperimentSpec};

pub enum Failure {
    Validation(String),
    Compute(String),
}

impl From<wickflow::Error> for Failure {
    fn from(e: wickflow::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(format!("output: {e}"))
    }
}

type Res<T> = std::result::Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "wickflow", version, about = "Wick-rotated quantization of the geodesic flow")]
pub struct Cli {
    /// Worker threads (0 = all cores); WICKFLOW_JOBS takes precedence.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for randomly sampled base points.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Scalar curvature and Ricci tensor at chart points.
    Curvature(CurvatureArgs),
    /// Geodesic flow trajectory with energy and transversality determinant.
    Flow(FlowArgs),
    /// Conjugate points along a geodesic.
    Conjugate(FlowArgs),
    /// Wick-rotated fibre integral j_t and its Laplace coefficients.
    Jt(JtArgs),
    /// Numeric against analytic Q(E) on a grid of base points.
    Quantize(QuantizeArgs),
    /// Fourier spectrum of Q(E) on flat models.
    Spectrum(SpectrumArgs),
    /// Gaussian tail mass outside r0 against its bound.
    Tails(TailsArgs),
    /// Partial real-time fibre integrals on the circle.
    DivergenceDemo(DivergenceArgs),
    /// Anti-holomorphic derivative of the Wick-rotated section on flat models.
    CheckHolo(HoloArgs),
    /// Built-in manifolds and test functions.
    List,
}

/// Comma-separated coordinates.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl FromStr for Point {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_list(s).map(Point)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_t_grid(s).map(Grid)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    /// Exact continuation on flat models with Fourier data, Taylor otherwise.
    Auto,
    Taylor,
    Exact,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Hermite,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct PointsArgs {
    /// Base point (repeatable).
    #[arg(long = "q")]
    pub q: Vec<Point>,
    /// Cell-centre grid with this many points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Random points in the middle of the chart (uses --seed).
    #[arg(long)]
    pub random: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct CurvatureArgs {
    /// Manifold file or built-in name.
    #[arg(long)]
    pub manifold: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub points: PointsArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct FlowArgs {
    /// Manifold file or built-in name.
    #[arg(long)]
    pub manifold: String,
    #[arg(long)]
    pub x: Point,
    #[arg(long)]
    pub p: Point,
    /// Flow time (for `conjugate`, the search horizon).
    #[arg(long)]
    pub sigma: f64,
    /// Composition steps (0 = 1000 per unit time).
    #[arg(long, default_value_t = 0)]
    pub steps: usize,
    /// Output rows for `flow`.
    #[arg(long, default_value_t = 11)]
    pub rows: usize,
    /// Bisection tolerance for `conjugate`.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct QuadArgs {
    /// Manifold file or built-in name.
    #[arg(long)]
    pub manifold: String,
    /// Test function: const[:c], fourier:k1,..., ylm:l,m, poly:<expr>.
    #[arg(long, default_value = "const")]
    pub psi: String,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// `a:b:xR` or comma list.
    #[arg(long = "t-grid", default_value = "1e-3:8e-3:x2")]
    pub t_grid: Grid,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Hermite)]
    pub scheme: SchemeArg,
    /// Quadrature nodes per axis (doubled once for the convergence check).
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    /// Fibre cutoff; default 12√(t_max ħ), clipped to the validity radius in Taylor mode.
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub points: PointsArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct JtArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub quad: QuadArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct QuantizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub quad: QuadArgs,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SpectrumArgs {
    /// Manifold file or built-in name.
    #[arg(long)]
    pub manifold: String,
    #[arg(long = "k-max", default_value_t = 3)]
    pub k_max: u32,
    #[arg(long = "q")]
    pub q: Option<Point>,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long = "t-grid", default_value = "1e-3:8e-3:x2")]
    pub t_grid: Grid,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TailsArgs {
    /// Manifold file or built-in name.
    #[arg(long)]
    pub manifold: String,
    #[arg(long = "q")]
    pub q: Option<Point>,
    #[arg(long, default_value = "const")]
    pub psi: String,
    #[arg(long)]
    pub r0: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long = "t-grid", default_value = "0.005,0.01,0.02,0.04")]
    pub t_grid: Grid,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct DivergenceArgs {
    #[arg(long, default_value = "fourier:1")]
    pub psi: String,
    #[arg(long = "q", default_value_t = 0.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Increasing momentum cutoffs.
    #[arg(long, default_value = "5,10,20,40,80,160")]
    pub cutoffs: Point,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct HoloArgs {
    /// Manifold file or built-in name.
    #[arg(long)]
    pub manifold: String,
    #[arg(long, default_value = "fourier:1")]
    pub psi: String,
    #[arg(long = "t-values", default_value = "0.2,0.5,1.0")]
    pub t_values: Point,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Positions and momenta per side of the sample grid.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long = "p-max", default_value_t = 2.0)]
    pub p_max: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: &Cli) -> Res<()> {
    match &cli.command {
        Command::Curvature(a) => run_curvature(a, cli.seed),
        Command::Flow(a) => run_flow(a, cli.seed),
        Command::Conjugate(a) => run_conjugate(a, cli.seed),
        Command::Jt(a) => run_jt(a, cli.seed),
        Command::Quantize(a) => run_quantize(a, cli.seed),
        Command::Spectrum(a) => run_spectrum(a, cli.seed),
        Command::Tails(a) => run_tails(a, cli.seed),
        Command::DivergenceDemo(a) => run_divergence(a, cli.seed),
        Command::CheckHolo(a) => run_holo(a, cli.seed),
        Command::List => {
            print!("{}", list_builtins());
            Ok(())
        }
    }
}

fn load_manifold(arg: &str) -> Res<(ManifoldFile, ChartMetric)> {
    let (file, _) = ManifoldFile::resolve(arg)?;
    let metric = file.to_metric()?;
    Ok((file, metric))
}

fn load_psi(spec: &str, metric: &ChartMetric) -> Res<TestFunction> {
    let psi = TestFunction::from_str(spec)?.with_dim(metric.dim());
    psi.check_dim(metric.dim())?;
    if let Some(d) = psi.dim() {
        if d != metric.dim() {
            return Err(Failure::Validation(format!(
                "test function {} needs dimension {d}, manifold has {}",
                psi.name(),
                metric.dim()
            )));
        }
    }
    Ok(psi)
}

fn check_point(metric: &ChartMetric, x: &[f64], what: &str) -> Res<()> {
    if x.len() != metric.dim() {
        return Err(Failure::Validation(format!(
            "{what} has {} coordinates, manifold has dimension {}",
            x.len(),
            metric.dim()
        )));
    }
    Ok(())
}

fn base_points(metric: &ChartMetric, p: &PointsArgs, seed: u64) -> Res<Vec<Vec<f64>>> {
    let mut pts: Vec<Vec<f64>> = p.q.iter().map(|q| q.0.clone()).collect();
    if let Some(m) = p.grid {
        if m == 0 {
            return Err(Failure::Validation("--grid must be positive".into()));
        }
        pts.extend(chart_grid(metric, m));
    }
    if let Some(c) = p.random {
        pts.extend(random_points(metric, c, seed));
    }
    if pts.is_empty() {
        pts = chart_grid(metric, per_axis_for(16, metric.dim()));
    }
    for x in &pts {
        check_point(metric, x, "base point")?;
    }
    Ok(pts)
}

/// Evaluates in parallel, keeping input order and surfacing the first error.
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> Res<U> + Sync + Send) -> Res<Vec<U>> {
    items.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

fn eval_poly(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * u + v)
}

/// Closed-form scalar curvature of the built-ins.
pub fn scalar_oracle(kind: &MetricKind, x: &[f64]) -> Option<f64> {
    match kind {
        MetricKind::Circle | MetricKind::FlatTorus => Some(0.0),
        MetricKind::RoundSphere { radius } => Some(2.0 / (radius * radius)),
        MetricKind::HyperbolicHalfPlane => Some(-2.0),
        MetricKind::SurfaceOfRevolution { profile } => {
            let d2: Vec<f64> = profile
                .iter()
                .enumerate()
                .skip(2)
                .map(|(i, c)| c * (i * (i - 1)) as f64)
                .collect();
            Some(-2.0 * eval_poly(&d2, x[0]) / eval_poly(profile, x[0]))
        }
        MetricKind::Custom => None,
    }
}

fn run_curvature(a: &CurvatureArgs, seed: u64) -> Res<()> {
    let (file, metric) = load_manifold(&a.manifold)?;
    let pts = base_points(&metric, &a.points, seed)?;
    let n = metric.dim();
    let rows = par_map(&pts, |x| {
        let c = curvature(&metric, x)?;
        let (g, _) = metric.checked(x)?;
        let mut row: Vec<String> = x.iter().map(|v| num(*v)).collect();
        row.push(num(c.scalar));
        row.push(scalar_oracle(metric.kind(), x).map_or_else(|| "NaN".into(), num));
        row.push(num(g.determinant()));
        for i in 0..n {
            for j in i..n {
                row.push(num(c.ricci[(i, j)]));
            }
        }
        Ok(row)
    })?;
    let spec = ExperimentSpec::new("curvature", Some(file), a, seed);
    let mut cols = indexed("x", n);
    cols.extend(["scalar", "scalar_expected", "det_g"].map(String::from));
    for i in 0..n {
        for j in i..n {
            cols.push(format!("ricci_{i}{j}"));
        }
    }
    let mut csv = Csv::create(a.out.as_deref(), &spec, &cols)?;
    for r in rows {
        csv.row(&r)?;
    }
    Ok(csv.finish()?)
}

fn phase_point(metric: &ChartMetric, a: &FlowArgs) -> Res<PhasePoint> {
    check_point(metric, &a.x.0, "--x")?;
    check_point(metric, &a.p.0, "--p")?;
    if !a.sigma.is_finite() {
        return Err(Failure::Validation("--sigma must be finite".into()));
    }
    Ok(PhasePoint::new(a.x.0.clone(), a.p.0.clone()))
}

fn phase_cols(n: usize) -> Vec<String> {
    let mut cols = vec!["sigma".to_string()];
    cols.extend(indexed("x", n));
    cols.extend(indexed("p", n));
    cols
}

fn run_flow(a: &FlowArgs, seed: u64) -> Res<()> {
    let (file, metric) = load_manifold(&a.manifold)?;
    let z = phase_point(&metric, a)?;
    let n = metric.dim();
    let opts = FlowOptions {
        steps: a.steps,
        ..FlowOptions::default()
    };
    let mut states = Vec::new();
    flow::flow_with(&metric, &z, a.sigma, &opts, |s| states.push(s.clone()))?;
    let e0 = kinetic_energy(&metric, &z)?;
    let rows = a.rows.max(2).min(states.len());
    let spec = ExperimentSpec::new("flow", Some(file), a, seed);
    let mut cols = phase_cols(n);
    cols.extend(["energy", "energy0", "det_block"].map(String::from));
    let mut csv = Csv::create(a.out.as_deref(), &spec, &cols)?;
    let last = states.len() - 1;
    let mut prev = usize::MAX;
    for k in 0..rows {
        let i = if rows == 1 { last } else { (k * last + (rows - 1) / 2) / (rows - 1) };
        let i = if k + 1 == rows { last } else { i };
        if i == prev {
            continue;
        }
        prev = i;
        let st = &states[i];
        let mut row = vec![num(st.sigma)];
        row.extend(st.point.x.iter().chain(&st.point.p).map(|v| num(*v)));
        row.push(num(kinetic_energy(&metric, &st.point)?));
        row.push(num(e0));
        row.push(num(st.position_momentum_block().determinant()));
        csv.row(&row)?;
    }
    Ok(csv.finish()?)
}

fn run_conjugate(a: &FlowArgs, seed: u64) -> Res<()> {
    let (file, metric) = load_manifold(&a.manifold)?;
    let z = phase_point(&metric, a)?;
    let n = metric.dim();
    let found = conjugate_points(&metric, &z, a.sigma, a.steps, a.tol)?;
    let spec = ExperimentSpec::new("conjugate", Some(file), a, seed);
    let mut cols = vec!["index".to_string()];
    cols.extend(phase_cols(n));
    cols.extend(["energy", "det_block"].map(String::from));
    let mut csv = Csv::create(a.out.as_deref(), &spec, &cols)?;
    for (i, c) in found.iter().enumerate() {
        let mut row = vec![i.to_string(), num(c.sigma)];
        row.extend(c.state.point.x.iter().chain(&c.state.point.p).map(|v| num(*v)));
        row.push(num(kinetic_energy(&metric, &c.state.point)?));
        row.push(num(c.state.position_momentum_block().determinant()));
        csv.row(&row)?;
    }
    Ok(csv.finish()?)
}

fn integrand_mode(mode: ModeArg, metric: &ChartMetric, psi: &TestFunction) -> IntegrandMode {
    match mode {
        ModeArg::Taylor => IntegrandMode::Taylor,
        ModeArg::Exact => IntegrandMode::Exact,
        ModeArg::Auto if metric.is_flat() && psi.has_continuation() => IntegrandMode::Exact,
        ModeArg::Auto => IntegrandMode::Taylor,
    }
}

/// Quadrature settings at `q`: explicit cutoff as given, otherwise the
/// default cutoff clipped to the validity radius.
fn quad_config(a: &QuadArgs, metric: &ChartMetric, psi: &TestFunction, q: &[f64]) -> Res<QuadratureConfig> {
    if !(a.hbar > 0.0 && a.hbar.is_finite()) {
        return Err(Failure::Validation(format!("--hbar must be positive (got {})", a.hbar)));
    }
    let tmax = a.t_grid.0.iter().cloned().fold(0.0, f64::max);
    let r = match a.r {
        Some(r) => r,
        None => r_prime_at(metric, q, 12.0 * (tmax * a.hbar).sqrt())?,
    };
    let scheme = match a.scheme {
        SchemeArg::Hermite => Scheme::GaussHermiteTruncated,
        SchemeArg::Trapezoid => Scheme::TensorTrapezoid,
    };
    let mut cfg = QuadratureConfig::new(r, tmax, a.hbar)
        .with_mode(integrand_mode(a.mode, metric, psi))
        .with_scheme(scheme);
    cfg.nodes_per_axis = a.nodes;
    cfg.validate()?;
    Ok(cfg)
}

fn run_jt(a: &JtArgs, seed: u64) -> Res<()> {
    let q = &a.quad;
    let (file, metric) = load_manifold(&q.manifold)?;
    let psi = load_psi(&q.psi, &metric)?;
    let pts = base_points(&metric, &q.points, seed)?;
    let n = metric.dim();
    let blocks = par_map(&pts, |x| {
        let cfg = quad_config(q, &metric, &psi, x)?;
        q.t_grid
            .0
            .iter()
            .map(|&t| {
                let e = laplace_expansion(&metric, &psi, x, &cfg.with_t(t))?;
                let mut row: Vec<String> = x.iter().map(|v| num(*v)).collect();
                row.extend([num(t), num(cfg.r)]);
                row.extend(cnum(e.jt_numeric));
                row.extend(cnum(e.a0));
                row.extend(cnum(e.a1));
                row.push(num(e.residual));
                Ok(row)
            })
            .collect::<Res<Vec<_>>>()
    })?;
    let spec = ExperimentSpec::new("jt", Some(file), a, seed);
    let mut cols = indexed("q", n);
    cols.extend(
        ["t", "r", "re_jt", "im_jt", "a0_re", "a0_im", "a1_re", "a1_im", "residual"].map(String::from),
    );
    let mut csv = Csv::create(a.out.as_deref(), &spec, &cols)?;
    for r in blocks.into_iter().flatten() {
        csv.row(&r)?;
    }
    Ok(csv.finish()?)
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn report_json(rep: &QuantizationReport, spec: &ExperimentSpec, psi: &TestFunction, mode: IntegrandMode) -> serde_json::Value {
    serde_json::json!({
        "meta": spec.meta_json(),
        "psi": psi.name(),
        "mode": match mode { IntegrandMode::Taylor => "taylor", IntegrandMode::Exact => "exact" },
        "hbar": rep.hbar,
        "t_grid": rep.t_grid,
        "q_grid": rep.q_grid,
        "numeric_qe": rep.numeric_qe.iter().map(|z| c2(*z)).collect::<Vec<_>>(),
        "analytic_qe": rep.analytic_qe.iter().map(|z| c2(*z)).collect::<Vec<_>>(),
        "error_estimates": rep.error_estimates,
        "rel_errors": rep.rel_errors,
        "max_rel_error": rep.max_rel_error,
        "max_abs_error": rep.max_abs_error,
        "degenerate": rep.degenerate,
    })
}

fn run_quantize(a: &QuantizeArgs, seed: u64) -> Res<()> {
    let q = &a.quad;
    let (file, metric) = load_manifold(&q.manifold)?;
    let psi = load_psi(&q.psi, &metric)?;
    let pts = base_points(&metric, &q.points, seed)?;
    let n = metric.dim();
    let mode = integrand_mode(q.mode, &metric, &psi);
    let points = par_map(&pts, |x| {
        let cfg = quad_config(q, &metric, &psi, x)?;
        Ok(quantizer::quantize_point(&metric, &psi, x, &q.t_grid.0, &cfg)?)
    })?;
    let rep = QuantizationReport::assemble(&q.t_grid.0, q.hbar, points);
    let spec = ExperimentSpec::new("quantize", Some(file), a, seed);
    match a.format {
        FormatArg::Json => {
            let mut out = open_out(a.out.as_deref())?;
            let text = serde_json::to_string_pretty(&report_json(&rep, &spec, &psi, mode))
                .map_err(|e| Failure::Compute(format!("report: {e}")))?;
            writeln!(out, "{text}")?;
            out.flush()?;
        }
        FormatArg::Csv => {
            let mut cols = indexed("q", n);
            cols.extend(
                ["numeric_re", "numeric_im", "analytic_re", "analytic_im", "rel_error", "error_estimate"]
                    .map(String::from),
            );
            let mut csv = Csv::create(a.out.as_deref(), &spec, &cols)?;
            for i in 0..rep.q_grid.len() {
                let mut row: Vec<String> = rep.q_grid[i].iter().map(|v| num(*v)).collect();
                row.extend(cnum(rep.numeric_qe[i]));
                row.extend(cnum(rep.analytic_qe[i]));
                row.push(rep.rel_errors[i].map_or_else(|| "NaN".into(), num));
                row.push(num(rep.error_estimates[i]));
                csv.row(&row)?;
            }
            csv.finish()?;
        }
    }
    Ok(())
}


fn run_spectrum(a: &SpectrumArgs, seed: u64) -> Res<()> {
    let (file, metric) = load_manifold(&a.manifold)?;
    let q = a.q.as_ref().map(|p| p.0.clone()).unwrap_or_else(|| metric.domain().centre());
    check_point(&metric, &q, "--q")?;
    let modes = quantizer::fourier_modes(metric.dim(), a.k_max);
    if !metric.is_flat() {
        return Err(Failure::Validation(format!(
            "spectrum needs circle or flat_torus (got {})",
            metric.kind().name()
        )));
    }
    let entries = par_map(&modes, |k| {
        let e = quantizer::flat_spectrum_mode(&metric, a.hbar, k, &q, &a.t_grid.0)?;
        Ok(e)
    })?;
    let spec = ExperimentSpec::new("spectrum", Some(file), a, seed);
    let mut cols = indexed("k", metric.dim());
    cols.extend(["eigenvalue", "numeric_re", "numeric_im", "abs_error", "error_estimate"].map(String::from));
    let mut csv = Csv::create(a.out.as_deref(), &spec, &cols)?;
    for e in entries {
        let mut row: Vec<String> = e.k.iter().map(|v| v.to_string()).collect();
        row.push(num(e.eigenvalue));
        row.extend(cnum(e.numeric));
        row.push(num((e.numeric - e.eigenvalue).norm()));
        row.push(num(e.error_estimate));
        csv.row(&row)?;
    }
    Ok(csv.finish()?)
}

fn run_tails(a: &TailsArgs, seed: u64) -> Res<()> {
    let (file, metric) = load_manifold(&a.manifold)?;
    let psi = load_psi(&a.psi, &metric)?;
    let q = a.q.as_ref().map(|p| p.0.clone()).unwrap_or_else(|| metric.domain().centre());
    check_point(&metric, &q, "--q")?;
    if !(a.hbar > 0.0) {
        return Err(Failure::Validation(format!("--hbar must be positive (got {})", a.hbar)));
    }
    let ev = JtEvaluator::new(&metric, &psi, &q, IntegrandMode::Taylor)?;
    let jet = ev.normal_jet().clone();
    let rows = par_map(&a.t_grid.0, |&t| {
        let tm = tail_mass(&metric, &q, a.r0, a.r, t, a.hbar, |p| psi_flow_taylor(&jet, p).norm())?;
        Ok(vec![num(t), num(tm.tail), num(tm.bound), num(tm.holder_constant)])
    })?;
    let spec = ExperimentSpec::new("tails", Some(file), a, seed);
    let cols = ["t", "tail_mass", "bound", "holder_constant"].map(String::from);
    let mut csv = Csv::create(a.out.as_deref(), &spec, &cols)?;
    for r in rows {
        csv.row(&r)?;
    }
    Ok(csv.finish()?)
}

fn run_divergence(a: &DivergenceArgs, seed: u64) -> Res<()> {
    let psi = TestFunction::from_str(&a.psi)?.with_dim(1);
    psi.check_dim(1)?;
    let rows = real_time_divergence_demo(&psi, a.q, a.sigma, &a.cutoffs.0)?;
    let spec = ExperimentSpec::new("divergence-demo", ManifoldFile::builtin("circle").ok(), a, seed);
    let cols = ["cutoff", "re", "im", "abs_integral"].map(String::from);
    let mut csv = Csv::create(a.out.as_deref(), &spec, &cols)?;
    for r in rows {
        let mut row = vec![num(r.cutoff)];
        row.extend(cnum(r.value));
        row.push(num(r.abs_integral));
        csv.row(&row)?;
    }
    Ok(csv.finish()?)
}

fn run_holo(a: &HoloArgs, seed: u64) -> Res<()> {
    let (file, metric) = load_manifold(&a.manifold)?;
    let psi = load_psi(&a.psi, &metric)?;
    if a.size == 0 {
        return Err(Failure::Validation("--size must be positive".into()));
    }
    let grid = quantizer::holo_grid(metric.dim(), a.size, a.p_max);
    let rows = par_map(&a.t_values.0, |&t| {
        let h = quantizer::holomorphic_section_check(&metric, &psi, t, a.hbar, &grid)?;
        Ok(vec![
            num(t),
            num(h.residual),
            num(h.control_residual),
            num(h.control_min_ratio),
            h.points.to_string(),
        ])
    })?;
    let spec = ExperimentSpec::new("check-holo", Some(file), a, seed);
    let cols = ["t", "residual", "control_residual", "control_min_ratio", "points"].map(String::from);
    let mut csv = Csv::create(a.out.as_deref(), &spec, &cols)?;
    for r in rows {
        csv.row(&r)?;
    }
    Ok(csv.finish()?)
}

pub fn list_builtins() -> String {
    "\
manifolds:
  circle                 dim = 1; periodic chart [0, 2pi)
  flat_torus             dim = n (required); periodic chart [0, 2pi)^n
  round_sphere           dim = 2; radius = <float> (default 1); polar chart, caps of 0.01 removed
  hyperbolic_halfplane   dim = 2; upper half-plane (dx^2 + dy^2)/y^2
  surface_of_revolution  dim = 2; profile = [c0, c1, ...] with f(u) = sum c_i u^i > 0; domain.lo/hi[0] bound u
  common keys            domain = { lo = [...], hi = [...] }, fd_order = 2 | 4 | 6, fd_step = <float>
test functions:
  constant               const[:c]
  fourier_mode           fourier:k1,...,kn       e^{i k.x}
  spherical_harmonic     ylm:l,m                 Y_l^m(theta, phi), round_sphere only
  polynomial             poly:<expr>             e.g. poly:1.5*x0^2*x1-x1^3+2
"
    .to_string()
}
