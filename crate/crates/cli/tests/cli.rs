use std::path::Path;
use std::process::{Command, Output};

fn wickflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wickflow"))
        .args(args)
        .env_remove("WICKFLOW_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_body(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let cols = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (cols, rows)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn list_names_builtins_stably() {
    let a = wickflow(&["list"]);
    assert!(a.status.success());
    let text = stdout(&a);
    for name in ["circle", "flat_torus", "round_sphere", "fourier_mode", "spherical_harmonic"] {
        assert!(text.contains(name), "missing {name}");
    }
    assert_eq!(text, stdout(&wickflow(&["list"])));
}

#[test]
fn quantize_sphere_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sphere.cfg", "kind = \"round_sphere\"\nradius = 1.0\n");
    let out = dir.path().join("report.json");
    let o = wickflow(&[
        "quantize",
        "--manifold",
        &cfg,
        "--psi",
        "const",
        "--t-grid",
        "1e-3:8e-3:x2",
        "--q",
        "1.0,0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(rep["max_rel_error"].as_f64().unwrap() < 1e-2);
    assert_eq!(rep["t_grid"].as_array().unwrap().len(), 4);
    let re = rep["numeric_qe"][0][0].as_f64().unwrap();
    assert!((re - 1.0 / 6.0).abs() < 1e-2 / 6.0);
    assert_eq!(rep["meta"]["spec_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn tails_sweep_stays_under_bound() {
    let o = wickflow(&["tails", "--manifold", "circle", "--r0", "1.0", "--r", "4.0", "--t-grid", "0.02,0.05,0.1"]);
    assert!(o.status.success());
    let (cols, rows) = csv_body(&stdout(&o));
    assert_eq!(&cols[..3], &["t", "tail_mass", "bound"]);
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r[1] > 0.0 && r[1] <= r[2]);
    }
}

#[test]
fn malformed_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "kind = \"circle\"\nfd_ordr = 4\n");
    let o = wickflow(&["curvature", "--manifold", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fd_ordr"));
    let o = wickflow(&["quantize", "--manifold", "circle", "--psi", "ylm:1,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = wickflow(&["jt", "--manifold", "circle", "--t-grid", "1e-3:1e-2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn computational_error_exits_one() {
    let o = wickflow(&["curvature", "--manifold", "sphere", "--q", "0.001,1.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn seeded_output_is_byte_identical() {
    let run = |seed: &str| stdout(&wickflow(&["curvature", "--manifold", "sphere:2", "--random", "4", "--seed", seed]));
    assert_eq!(run("3"), run("3"));
    assert_ne!(run("3"), run("4"));
}

#[test]
fn jobs_env_overrides_flag() {
    let args = ["curvature", "--manifold", "hyperbolic", "--grid", "3", "--jobs", "1"];
    let base = wickflow(&args);
    let o = Command::new(env!("CARGO_BIN_EXE_wickflow"))
        .args(args)
        .env("WICKFLOW_JOBS", "3")
        .output()
        .unwrap();
    assert_eq!(o.stdout, base.stdout);
    let o = Command::new(env!("CARGO_BIN_EXE_wickflow"))
        .args(args)
        .env("WICKFLOW_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn header_and_precision() {
    let o = wickflow(&["curvature", "--manifold", "sphere", "--q", "1.0,2.0"]);
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(header[0].starts_with("# wickflow "));
    assert!(header.iter().any(|l| l.starts_with("# spec_sha256: ")));
    assert!(header.iter().any(|l| l.contains("param q=")));
    let (cols, rows) = csv_body(&text);
    let s = cols.iter().position(|c| c == "scalar").unwrap();
    assert_eq!(cols[s + 1], "scalar_expected");
    assert!((rows[0][s] - 2.0).abs() < 1e-6);
    let cell = text.lines().last().unwrap().split(',').next().unwrap();
    assert_eq!(cell, "1.0000000000000000e0");
}

#[test]
fn flow_and_conjugate_csv() {
    let o = wickflow(&["flow", "--manifold", "circle", "--x", "0.5", "--p", "2", "--sigma", "1", "--rows", "3"]);
    let (cols, rows) = csv_body(&stdout(&o));
    assert_eq!(cols, ["sigma", "x0", "p0", "energy", "energy0", "det_block"]);
    assert_eq!(rows.len(), 3);
    let last = &rows[2];
    assert!((last[1] - 2.5).abs() < 1e-12 && (last[5] - 1.0).abs() < 1e-9);
    let o = wickflow(&[
        "conjugate", "--manifold", "sphere", "--x", "1.5707963267948966,0", "--p", "0,1", "--sigma", "4",
    ]);
    let (_, rows) = csv_body(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1] - std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn jt_spectrum_holo_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("jt.csv");
    let o = wickflow(&["jt", "--manifold", "circle", "--psi", "fourier:1", "--q", "0.2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let (cols, rows) = csv_body(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(cols.len(), 10);
    assert_eq!(rows.len(), 4);

    let o = wickflow(&["spectrum", "--manifold", "flat_torus:2", "--k-max", "1"]);
    let (_, rows) = csv_body(&stdout(&o));
    assert_eq!(rows.len(), 9);
    for r in rows {
        assert!((r[3] - r[2]).abs() <= 1e-6 * r[2].max(1.0));
    }

    let o = wickflow(&["check-holo", "--manifold", "circle", "--size", "16"]);
    let (_, rows) = csv_body(&stdout(&o));
    for r in rows {
        assert!(r[1] <= 1e-10 && r[2] > 1e-2);
    }
    let o = wickflow(&["check-holo", "--manifold", "sphere"]);
    assert_eq!(o.status.code(), Some(2));

    let o = wickflow(&["divergence-demo", "--cutoffs", "10,20"]);
    let (cols, rows) = csv_body(&stdout(&o));
    assert_eq!(cols, ["cutoff", "re", "im", "abs_integral"]);
    assert!(rows[1][3] > rows[0][3]);
}
