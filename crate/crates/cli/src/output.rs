//! Artifact headers, CSV rows and the experiment description they hash.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};
use wickflow::manifold_file::ManifoldFile;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything that determines an artifact's contents.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub subcommand: String,
    pub manifold: Option<ManifoldFile>,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new<P: Serialize>(subcommand: &str, manifold: Option<ManifoldFile>, params: &P, seed: u64) -> Self {
        let mut map = BTreeMap::new();
        if let Ok(serde_json::Value::Object(obj)) = serde_json::to_value(params) {
            for (k, v) in obj {
                let text = match v {
                    serde_json::Value::Null => continue,
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                map.insert(k, text);
            }
        }
        ExperimentSpec {
            subcommand: subcommand.to_string(),
            manifold,
            params: map,
            seed,
        }
    }

    pub fn hash(&self) -> String {
        let canon = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&canon))
    }

    pub fn header_lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("wickflow {VERSION}"),
            format!("command: {}", self.subcommand),
            format!("spec_sha256: {}", self.hash()),
        ];
        if let Some(m) = &self.manifold {
            v.push(format!("manifold: {}", serde_json::to_string(m).expect("manifold serializes")));
        }
        v.push(format!("seed: {}", self.seed));
        for (k, val) in &self.params {
            v.push(format!("param {k}={val}"));
        }
        v
    }

    pub fn meta_json(&self) -> serde_json::Value {
        serde_json::json!({
            "version": VERSION,
            "command": self.subcommand,
            "spec_sha256": self.hash(),
            "manifold": self.manifold,
            "seed": self.seed,
            "params": self.params,
        })
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn cnum(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

pub fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub struct Csv {
    out: Box<dyn Write>,
}

impl Csv {
    pub fn create(path: Option<&Path>, spec: &ExperimentSpec, columns: &[String]) -> io::Result<Self> {
        let mut out = open_out(path)?;
        for line in spec.header_lines() {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "{}", columns.join(","))?;
        Ok(Csv { out })
    }

    pub fn row(&mut self, cells: &[String]) -> io::Result<()> {
        writeln!(self.out, "{}", cells.join(","))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// `prefix0, prefix1, …`
pub fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}
