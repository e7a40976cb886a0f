//! Key–value manifold descriptions (TOML) and built-in shorthands.
//!
//! ```toml
//! kind = "round_sphere"
//! dim = 2
//! radius = 1.0
//! fd_order = 4
//! fd_step = 1e-3
//!
//! [domain]
//! lo = [0.1, 0.0]
//! hi = [3.0, 6.283185307179586]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::FdConfig;
use crate::geometry::{ChartDomain, ChartMetric};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

pub const BUILTIN_KINDS: [&str; 5] = [
    "circle",
    "flat_torus",
    "round_sphere",
    "hyperbolic_halfplane",
    "surface_of_revolution",
];

impl ManifoldFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidInput(format!("manifold file: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Shorthand names: `circle`, `flat_torus[:n]`, `round_sphere[:ρ]`
    /// (alias `sphere`), `hyperbolic_halfplane` (alias `hyperbolic`).
    pub fn builtin(name: &str) -> Result<Self> {
        let (head, arg) = name.split_once(':').unwrap_or((name, ""));
        let num = |what: &str| -> Result<Option<f64>> {
            if arg.is_empty() {
                Ok(None)
            } else {
                arg.parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::InvalidInput(format!("bad {what} '{arg}' in '{name}'")))
            }
        };
        let mut f = ManifoldFile {
            kind: String::new(),
            dim: None,
            radius: None,
            profile: None,
            domain: None,
            fd_order: None,
            fd_step: None,
        };
        match head {
            "circle" => f.kind = "circle".into(),
            "flat_torus" | "torus" => {
                f.kind = "flat_torus".into();
                f.dim = match num("dimension")? {
                    Some(d) if d >= 1.0 && d.fract() == 0.0 => Some(d as usize),
                    Some(_) => return Err(Error::InvalidInput(format!("bad dimension in '{name}'"))),
                    None => Some(2),
                };
            }
            "round_sphere" | "sphere" => {
                f.kind = "round_sphere".into();
                f.radius = Some(num("radius")?.unwrap_or(1.0));
            }
            "hyperbolic_halfplane" | "hyperbolic" => f.kind = "hyperbolic_halfplane".into(),
            _ => return Err(Error::InvalidInput(format!("unknown built-in manifold '{name}'"))),
        }
        Ok(f)
    }

    /// A readable file wins; otherwise the argument is tried as a built-in name.
    pub fn resolve(arg: &str) -> Result<(Self, Option<String>)> {
        let p = Path::new(arg);
        if p.is_file() {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::InvalidInput(format!("cannot read {arg}: {e}")))?;
            return Ok((Self::parse(&text)?, Some(text)));
        }
        Self::builtin(arg).map(|f| (f, None)).map_err(|_| {
            Error::InvalidInput(format!("'{arg}' is neither a readable manifold file nor a built-in name"))
        })
    }

    fn forbid(&self, key: &str, present: bool) -> Result<()> {
        if present {
            Err(Error::InvalidInput(format!("key '{key}' does not apply to kind '{}'", self.kind)))
        } else {
            Ok(())
        }
    }

    fn expect_dim(&self, want: usize) -> Result<()> {
        match self.dim {
            Some(d) if d != want => Err(Error::InvalidInput(format!(
                "key 'dim': kind '{}' has dimension {want} (got {d})",
                self.kind
            ))),
            _ => Ok(()),
        }
    }

    pub fn to_metric(&self) -> Result<ChartMetric> {
        let metric = match self.kind.as_str() {
            "circle" => {
                self.expect_dim(1)?;
                self.forbid("radius", self.radius.is_some())?;
                self.forbid("profile", self.profile.is_some())?;
                ChartMetric::circle()
            }
            "flat_torus" => {
                self.forbid("radius", self.radius.is_some())?;
                self.forbid("profile", self.profile.is_some())?;
                let d = self
                    .dim
                    .ok_or_else(|| Error::InvalidInput("key 'dim' is required for kind 'flat_torus'".into()))?;
                ChartMetric::flat_torus(d)?
            }
            "round_sphere" => {
                self.expect_dim(2)?;
                self.forbid("profile", self.profile.is_some())?;
                ChartMetric::round_sphere(self.radius.unwrap_or(1.0))
                    .map_err(|e| Error::InvalidInput(format!("key 'radius': {e}")))?
            }
            "hyperbolic_halfplane" => {
                self.expect_dim(2)?;
                self.forbid("radius", self.radius.is_some())?;
                self.forbid("profile", self.profile.is_some())?;
                ChartMetric::hyperbolic_halfplane()
            }
            "surface_of_revolution" => {
                self.expect_dim(2)?;
                self.forbid("radius", self.radius.is_some())?;
                let profile = self.profile.clone().ok_or_else(|| {
                    Error::InvalidInput("key 'profile' is required for kind 'surface_of_revolution'".into())
                })?;
                let (lo, hi) = match &self.domain {
                    Some(d) if d.lo.len() == 2 && d.hi.len() == 2 => (d.lo[0], d.hi[0]),
                    Some(_) => return Err(Error::InvalidInput("key 'domain': expected 2 bounds per side".into())),
                    None => (-1.0, 1.0),
                };
                ChartMetric::surface_of_revolution(profile, (lo, hi))
                    .map_err(|e| Error::InvalidInput(format!("key 'profile': {e}")))?
            }
            "custom" => {
                return Err(Error::Unsupported(
                    "custom metrics are only available through the library API".into(),
                ))
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "key 'kind': unknown manifold kind '{other}' (expected one of {})",
                    BUILTIN_KINDS.join(", ")
                )))
            }
        };
        let metric = match &self.domain {
            Some(d) => {
                let periodic = metric.domain().periodic.clone();
                if d.lo.len() != metric.dim() || d.hi.len() != metric.dim() {
                    return Err(Error::InvalidInput(format!(
                        "key 'domain': expected {} bounds per side",
                        metric.dim()
                    )));
                }
                let dom = ChartDomain::new(d.lo.clone(), d.hi.clone(), periodic)
                    .map_err(|e| Error::InvalidInput(format!("key 'domain': {e}")))?;
                metric.with_domain(dom)?
            }
            None => metric,
        };
        let def = FdConfig::default();
        let fd = FdConfig::new(self.fd_order.unwrap_or(def.order), self.fd_step.unwrap_or(def.step))
            .map_err(|e| Error::InvalidInput(format!("keys 'fd_order'/'fd_step': {e}")))?;
        Ok(metric.with_fd(fd))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifold description serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricKind;

    #[test]
    fn sphere_file_round_trip() {
        let text = "kind = \"round_sphere\"\nradius = 2.0\nfd_order = 6\n";
        let f = ManifoldFile::parse(text).unwrap();
        let m = f.to_metric().unwrap();
        assert_eq!(m.kind(), &MetricKind::RoundSphere { radius: 2.0 });
        assert_eq!(m.fd().order, 6);
        assert_eq!(ManifoldFile::parse(&f.to_toml()).unwrap(), f);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = ManifoldFile::parse("kind = \"circle\"\nradios = 1.0\n").unwrap_err();
        assert!(e.is_validation());
        assert!(e.to_string().contains("radios"), "{e}");
    }

    #[test]
    fn misplaced_keys_rejected() {
        let f = ManifoldFile::parse("kind = \"circle\"\nradius = 1.0\n").unwrap();
        assert!(f.to_metric().unwrap_err().to_string().contains("radius"));
        let f = ManifoldFile::parse("kind = \"flat_torus\"\n").unwrap();
        assert!(f.to_metric().unwrap_err().to_string().contains("dim"));
        let f = ManifoldFile::parse("kind = \"custom\"\ndim = 2\n").unwrap();
        assert!(f.to_metric().unwrap_err().is_validation());
        let f = ManifoldFile::parse("kind = \"circle\"\nfd_order = 3\n").unwrap();
        assert!(f.to_metric().unwrap_err().to_string().contains("fd_order"));
    }

    #[test]
    fn surface_uses_domain_for_profile_range() {
        let text = "kind = \"surface_of_revolution\"\nprofile = [1.0, 0.0, 0.5]\n[domain]\nlo = [-0.5, 0.0]\nhi = [0.5, 6.283185307179586]\n";
        let m = ManifoldFile::parse(text).unwrap().to_metric().unwrap();
        assert_eq!(m.domain().lo[0], -0.5);
        assert!(m.domain().periodic[1]);
    }

    #[test]
    fn builtin_shorthands() {
        let m = ManifoldFile::builtin("flat_torus:3").unwrap().to_metric().unwrap();
        assert_eq!(m.dim(), 3);
        let m = ManifoldFile::builtin("sphere:0.5").unwrap().to_metric().unwrap();
        assert_eq!(m.kind(), &MetricKind::RoundSphere { radius: 0.5 });
        assert!(ManifoldFile::builtin("klein_bottle").is_err());
    }
}
