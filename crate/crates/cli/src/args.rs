//! Small value parsers shared by the subcommands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wickflow::geometry::ChartMetric;

/// `a:b:xR` (geometric, ratio `R`, from `a` up to `b`) or a comma list.
pub fn parse_t_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    let out = if let Some((a, rest)) = s.split_once(':') {
        let (b, ratio) = rest
            .split_once(":x")
            .ok_or_else(|| format!("t-grid '{s}': expected 'a:b:xR'"))?;
        let a = parse_f64(a)?;
        let b = parse_f64(b)?;
        let ratio = parse_f64(ratio)?;
        if !(a > 0.0 && b >= a && ratio > 1.0) {
            return Err(format!("t-grid '{s}': need 0 < a <= b and R > 1"));
        }
        let mut v = Vec::new();
        let mut t = a;
        while t <= b * (1.0 + 1e-12) {
            v.push(t);
            t *= ratio;
            if v.len() > 64 {
                return Err(format!("t-grid '{s}' has too many points"));
            }
        }
        v
    } else {
        parse_list(s)?
    };
    if out.iter().any(|t| !(*t > 0.0)) {
        return Err(format!("t-grid '{s}': values must be positive"));
    }
    Ok(out)
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("bad number '{}'", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite number '{}'", s.trim()))
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Err("empty list".into());
    }
    s.split(',').map(parse_f64).collect()
}

/// `per_axis` cell centres per axis of the chart box.
pub fn chart_grid(metric: &ChartMetric, per_axis: usize) -> Vec<Vec<f64>> {
    let dom = metric.domain();
    let n = metric.dim();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        out.push(
            (0..n)
                .map(|a| dom.lo[a] + (dom.hi[a] - dom.lo[a]) * (idx[a] as f64 + 0.5) / per_axis as f64)
                .collect(),
        );
        let mut a = 0;
        loop {
            if a == n {
                return out;
            }
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Smallest per-axis count giving at least `total` points.
pub fn per_axis_for(total: usize, n: usize) -> usize {
    let mut m: usize = 1;
    while m.pow(n as u32) < total {
        m += 1;
    }
    m
}

/// Uniform points in the middle 80% of the chart box.
pub fn random_points(metric: &ChartMetric, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = metric.domain();
    (0..count)
        .map(|_| {
            (0..metric.dim())
                .map(|a| {
                    let w = dom.hi[a] - dom.lo[a];
                    dom.lo[a] + w * rng.gen_range(0.1..0.9)
                })
                .collect()
        })
        .collect()
}
