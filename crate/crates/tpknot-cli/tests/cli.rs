//! End-to-end checks of the command-line surface and file formats.

use serde_json::{json, Value};
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tpknot"))
}

fn make_circle(dir: &Path, n: usize) -> std::path::PathBuf {
    let path = dir.join("circle.json");
    let out = bin()
        .args(["zoo", "--name", "circle", "--n", &n.to_string(), "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn energy_reports_circle_value() {
    let dir = tempfile::tempdir().unwrap();
    let curve = make_circle(dir.path(), 128);
    let out = bin()
        .args(["energy", "--p", "4", "--q", "2", "--refine", "1", "--input"])
        .arg(&curve)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = report["outputs"]["value"].as_f64().unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((value - pi2).abs() / pi2 < 0.02, "value {value}");
    let table = report["outputs"]["refinement_table"].as_array().unwrap();
    assert_eq!(table.len(), 2);
    assert_eq!(table[1]["n"].as_u64().unwrap(), 256);
}

#[test]
fn json_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let curve = make_circle(dir.path(), 64);
    let copy = dir.path().join("copy.json");
    let out = bin()
        .args(["export", "--format", "json", "--input"])
        .arg(&curve)
        .arg("--out")
        .arg(&copy)
        .output()
        .unwrap();
    assert!(out.status.success());
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&curve).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&copy).unwrap()).unwrap();
    assert_eq!(a, b, "serialization must round-trip bit-stably");
}

#[test]
fn csv_and_obj_exports() {
    let dir = tempfile::tempdir().unwrap();
    let curve = make_circle(dir.path(), 64);
    let csv = dir.path().join("c.csv");
    bin()
        .args(["export", "--format", "csv", "--input"])
        .arg(&curve)
        .arg("--out")
        .arg(&csv)
        .status()
        .unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 65); // header + one row per sample
    assert!(text.starts_with("t,x,y,z"));

    let obj = dir.path().join("c.obj");
    bin()
        .args(["export", "--format", "obj", "--input"])
        .arg(&curve)
        .arg("--out")
        .arg(&obj)
        .status()
        .unwrap();
    let text = std::fs::read_to_string(&obj).unwrap();
    let vertices = text.lines().filter(|l| l.starts_with("v ")).count();
    let polylines: Vec<&str> = text.lines().filter(|l| l.starts_with("l ")).collect();
    assert_eq!(vertices, 64);
    assert_eq!(polylines.len(), 1);
    assert!(polylines[0].ends_with(" 1"), "polyline must close");
}

#[test]
fn seminorm_of_derivative() {
    let dir = tempfile::tempdir().unwrap();
    let curve = make_circle(dir.path(), 128);
    let out = bin()
        .args(["seminorm", "--s", "0.5", "--p", "2", "--input"])
        .arg(&curve)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["outputs"]["seminorm"].as_f64().unwrap() > 0.0);
}

#[test]
fn variation_with_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    // A generic (perturbed) circle: the exact circle is a critical point and
    // its first variation vanishes, which makes relative errors meaningless.
    let n = 96usize;
    let points: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let r = 1.0 + 0.07 * (2.0 * a).cos();
            [r * a.cos(), r * a.sin(), 0.04 * (3.0 * a).sin()]
        })
        .collect();
    let curve = dir.path().join("wobbly.json");
    std::fs::write(
        &curve,
        serde_json::to_string(&json!({"n": n, "points": points})).unwrap(),
    )
    .unwrap();
    // Hand-written bump test field around t = 0.3.
    let (center, radius) = (0.3, 0.1);
    let vectors: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let mut s = (t - center) % 1.0;
            if s < -0.5 {
                s += 1.0;
            } else if s >= 0.5 {
                s -= 1.0;
            }
            let s = s / radius;
            if s.abs() < 1.0 {
                let b = (1.0 - s * s).powi(3);
                [0.2 * b, -0.4 * b, 0.9 * b]
            } else {
                [0.0; 3]
            }
        })
        .collect();
    let phi = dir.path().join("phi.json");
    std::fs::write(
        &phi,
        serde_json::to_string(&json!({
            "n": n,
            "vectors": vectors,
            "support_center": center,
            "support_radius": radius,
        }))
        .unwrap(),
    )
    .unwrap();
    let out = bin()
        .args([
            "variation",
            "--p",
            "4",
            "--q",
            "2",
            "--el-breakdown",
            "--eta-center",
            "0.3",
            "--eta-radius",
            "0.1",
        ])
        .args(["--input"])
        .arg(&curve)
        .arg("--phi")
        .arg(&phi)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rel = report["outputs"]["rel_error"].as_f64().unwrap();
    assert!(rel < 1e-4, "analytic vs fd rel {rel}");
    let r1 = report["outputs"]["el_breakdown"]["R"][0].as_f64().unwrap();
    assert!(r1.abs() < 1e-14);
}

#[test]
fn minimize_writes_trace_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let curve = make_circle(dir.path(), 48);
    let trace = dir.path().join("trace.csv");
    let out_curve = dir.path().join("out.json");
    let out = bin()
        .args(["minimize", "--p", "4", "--q", "2", "--steps", "5", "--guard-dist", "0.05"])
        .args(["--input"])
        .arg(&curve)
        .arg("--out-trace")
        .arg(&trace)
        .arg("--out-curve")
        .arg(&out_curve)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(trace.exists() && out_curve.exists());
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("step,energy,step_size,guard,bilipschitz_lower,max_local_energy"));
}

#[test]
fn detect_on_pulltight_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("pt.json");
    bin()
        .args(["zoo", "--name", "pulltight", "--n", "2048", "--k", "3", "--out"])
        .arg(&curve)
        .status()
        .unwrap();
    let energy_out = bin()
        .args(["energy", "--p", "4", "--q", "2", "--input"])
        .arg(&curve)
        .output()
        .unwrap();
    let report: Value = serde_json::from_slice(&energy_out.stdout).unwrap();
    let total = report["outputs"]["value"].as_f64().unwrap();
    let out = bin()
        .args([
            "detect",
            "--epsilon",
            &format!("{}", 0.3 * total),
            "--lambda",
            &format!("{}", 1.01 * total),
            "--scales",
            "2",
        ])
        .args(["--input"])
        .arg(&curve)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let candidates = report["outputs"]["candidates"].as_array().unwrap();
    assert_eq!(candidates.len(), 1, "splice must be the only candidate");
    assert!((candidates[0].as_f64().unwrap() - 0.5).abs() < 0.1);
}

#[test]
fn glue_report_terms() {
    let dir = tempfile::tempdir().unwrap();
    let write_line = |name: &str, a: f64, b: f64, n: usize, shift: f64| {
        let values: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let x = a + (b - a) * i as f64 / (n - 1) as f64;
                [(x + shift).sin(), (x - shift).cos(), 0.1 * x]
            })
            .collect();
        let path = dir.path().join(name);
        std::fs::write(
            &path,
            serde_json::to_string(&json!({"a": a, "b": b, "values": values})).unwrap(),
        )
        .unwrap();
        path
    };
    let u = write_line("u.json", -2.0, 2.0, 1024, 0.0);
    let v = write_line("v.json", -1.0, 1.0, 512, 0.3);
    let out = bin()
        .args(["glue", "--delta", "0.125", "--s", "0.25", "--p", "2"])
        .arg("--u")
        .arg(&u)
        .arg("--v")
        .arg(&v)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["outputs"]["lhs"].as_f64().unwrap() > 0.0);
    assert_eq!(report["outputs"]["terms"].as_array().unwrap().len(), 6);
}

#[test]
fn verify_exit_codes_and_unknown_inputs() {
    let status = bin().args(["verify", "--suite", "invariance"]).status().unwrap();
    assert_eq!(status.code(), Some(0));
    // Unknown suite or missing file is an input error: exit code 2.
    let status = bin().args(["verify", "--suite", "bogus"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args(["energy", "--p", "4", "--q", "2", "--input", "/nonexistent.json"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn rejects_inadmissible_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let curve = make_circle(dir.path(), 64);
    let out = bin()
        .args(["energy", "--p", "3", "--q", "2", "--input"])
        .arg(&curve)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("q+2 <= p"), "got: {msg}");
}
