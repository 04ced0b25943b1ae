use std::path::Path;
use std::process::{Command, Output};

use dpheat_cli::{parse_config, render, Grid, RunConfig, TruncationSpec};
use dpheat::fields::Loading;
use dpheat::geometry::Inclusion;
use num_complex::Complex64;
use proptest::prelude::*;
use serde_json::Value;

const FLUX_STUDY: &str = r#"{
  "matrix_conductivity": 1.0,
  "inclusions": [
    {"center": [-0.18, 0.2], "radius": 0.145, "conductivity": 100.0},
    {"center": [0.33, -0.34], "radius": 0.145, "conductivity": 100.0},
    {"center": [0.33, 0.35], "radius": 0.145, "conductivity": 100.0},
    {"center": [-0.18, -0.2], "radius": 0.145, "conductivity": 100.0}
  ],
  "loading": {"intensity": -1.0, "angle": 0.0},
  "grid": {"nx": 9, "ny": 9}
}"#;

fn symmetric(radius: f64, conductivity: f64) -> String {
    let inc = |x: f64, y: f64| {
        format!(r#"{{"center": [{x}, {y}], "radius": {radius}, "conductivity": {conductivity}}}"#)
    };
    format!(
        r#"{{"matrix_conductivity": 1.0, "inclusions": [{}, {}, {}, {}]}}"#,
        inc(-0.25, 0.25),
        inc(0.25, 0.25),
        inc(0.25, -0.25),
        inc(-0.25, -0.25)
    )
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn dpheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpheat")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,region,Qx,Qy,T"));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn homogeneous_field_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.json",
        r#"{"matrix_conductivity": 2.0, "inclusions": [], "grid": {"nx": 3, "ny": 3}}"#,
    );
    let rows = csv_rows(&dpheat(&["field", cfg.to_str().unwrap()]));
    assert_eq!(rows.len(), 9);
    for r in rows {
        assert_eq!(r[2], "matrix");
        assert_eq!(num(&r[3]), 1.0);
        assert_eq!(num(&r[4]), 0.0);
        assert!((num(&r[5]) - num(&r[0]) / 2.0).abs() < 1e-9);
    }
}

#[test]
fn field_at_cell_center() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t1.json", FLUX_STUDY);
    let rows = csv_rows(&dpheat(&["field", cfg.to_str().unwrap()]));
    assert_eq!(rows.len(), 81);
    let center = rows.iter().find(|r| num(&r[0]) == 0.0 && num(&r[1]) == 0.0).unwrap();
    assert_eq!(center[2], "matrix");
    assert!((num(&center[3]) - 0.73081950).abs() < 2e-4);
    assert!(rows.iter().any(|r| r[2] == "inc1") && rows.iter().any(|r| r[2] == "inc4"));
}

#[test]
fn diagonal_loading_is_finite_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let text = FLUX_STUDY.replace(r#""angle": 0.0"#, r#""angle": 45"#);
    let cfg = write(dir.path(), "t1.json", &text);
    let rows = csv_rows(&dpheat(&["--degrees", "field", cfg.to_str().unwrap()]));
    for r in rows {
        for v in &r[3..] {
            assert!(num(v).is_finite());
        }
    }
}

#[test]
fn field_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t1.json", FLUX_STUDY);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = dpheat(&["field", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn effective_reproduces_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let sym = write(dir.path(), "s.json", &symmetric(0.1, 100.0));
    let report = json(&dpheat(&["effective", sym.to_str().unwrap()]));
    assert!((report["tensor"]["xx"].as_f64().unwrap() - 1.28098).abs() < 5e-5);
    assert_eq!(report["M"], 4);

    let r = (0.4 / std::f64::consts::PI).sqrt();
    let single = format!(
        r#"{{"matrix_conductivity": 1.0, "inclusions": [{{"center": [0.0, 0.0], "radius": {r}, "conductivity": 50.0}}]}}"#
    );
    let single = write(dir.path(), "n1.json", &single);
    let report = json(&dpheat(&["effective", single.to_str().unwrap()]));
    assert!((report["tensor"]["xx"].as_f64().unwrap() - 2.26325).abs() < 5e-5);
    assert!((report["nu"].as_f64().unwrap() - 0.4).abs() < 1e-15);
}

#[test]
fn homogeneous_effective_is_matrix_conductivity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.json", r#"{"matrix_conductivity": 3.5, "inclusions": []}"#);
    let report = json(&dpheat(&["effective", cfg.to_str().unwrap()]));
    let t = &report["tensor"];
    assert_eq!((t["xx"].as_f64(), t["yy"].as_f64()), (Some(3.5), Some(3.5)));
    assert!(t["xy"].as_f64().unwrap().abs() < 1e-15 && t["yx"].as_f64().unwrap().abs() < 1e-15);
    assert_eq!(report["residual_sup"].as_f64(), Some(0.0));
}

#[test]
fn residual_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t1.json", FLUX_STUDY);
    let sup = |order: &str| -> Vec<f64> {
        let report = json(&dpheat(&["residual", cfg.to_str().unwrap(), "--order", order]));
        assert_eq!(report["M"].as_u64().unwrap().to_string(), order);
        report["problems"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| {
                assert!(p["im_edge_integral"].as_f64().unwrap().abs() < 1e-8);
                assert!(p["edge_integral_gap"].as_f64().unwrap() < 1e-8);
                assert_eq!(p["residuals"].as_array().unwrap().len(), 4);
                p["residual_sup"].as_f64().unwrap()
            })
            .collect()
    };
    let (m0, m4) = (sup("0"), sup("4"));
    assert!(m4[0] < m0[0] && m4[1] < m0[1]);

    let sym = write(dir.path(), "s.json", &symmetric(0.2, 100.0));
    let report = json(&dpheat(&["residual", sym.to_str().unwrap()]));
    let p = report["problems"].as_array().unwrap();
    let (b, r) = (p[0]["residual_sup"].as_f64().unwrap(), p[1]["residual_sup"].as_f64().unwrap());
    assert!((b - r).abs() < 1e-10);

    let h = write(dir.path(), "h.json", r#"{"matrix_conductivity": 1.0}"#);
    let report = json(&dpheat(&["residual", h.to_str().unwrap()]));
    for p in report["problems"].as_array().unwrap() {
        assert_eq!(p["residual_sup"].as_f64(), Some(0.0));
    }
}

#[test]
fn maxwell_command() {
    let report = json(&dpheat(&["maxwell", "--nu", "0.1", "--rho", "0.5"]));
    assert!((report["maxwell"].as_f64().unwrap() - 1.05 / 0.95).abs() < 1e-15);
    let dir = tempfile::tempdir().unwrap();
    let sym = write(dir.path(), "s.json", &symmetric(0.1, 100.0));
    let report = json(&dpheat(&["maxwell", sym.to_str().unwrap()]));
    assert!((report["maxwell"].as_f64().unwrap() - 1.28096).abs() < 5e-6);
    assert_eq!(dpheat(&["maxwell", "--nu", "0.1"]).status.code(), Some(1));
    assert_eq!(dpheat(&["maxwell", "--nu", "2.0", "--rho", "0.9"]).status.code(), Some(1));
}

#[test]
fn validation_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"matrix_conductivity": 1.0, "inclusions": [{"center": [0.0, 0.0], "radius": 0.6, "conductivity": 2.0}]}"#,
    );
    let out = dpheat(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], false);
    assert_eq!(report["violations"][0]["index"], 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("inclusion 1"));
    assert_eq!(dpheat(&["effective", bad.to_str().unwrap()]).status.code(), Some(1));

    let good = write(dir.path(), "t1.json", FLUX_STUDY);
    assert_eq!(json(&dpheat(&["validate", good.to_str().unwrap()]))["valid"], true);
    let empty = write(dir.path(), "e.json", r#"{"matrix_conductivity": 1.0, "inclusions": []}"#);
    assert_eq!(json(&dpheat(&["validate", empty.to_str().unwrap()]))["valid"], true);
}

#[test]
fn malformed_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"matrix_conductivity": 1.0, "inclusions": [{"center": [0.0], "radius": 0.1, "conductivity": 2.0}]}"#,
    );
    let out = dpheat(&["effective", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/inclusions/0/center"));

    let no_grid = write(dir.path(), "e.json", r#"{"matrix_conductivity": 1.0}"#);
    assert_eq!(dpheat(&["field", no_grid.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(dpheat(&["effective", "/nonexistent/cell.json"]).status.code(), Some(1));
    let q = dpheat(&["effective", no_grid.to_str().unwrap(), "--quadrature", "2"]);
    assert_eq!(q.status.code(), Some(1));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, -1.0f64..1.0, Just(0.0), Just(1e-300)]
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    let inclusion = (finite(), finite(), finite(), finite())
        .prop_map(|(x, y, r, l)| Inclusion::new(Complex64::new(x, y), r, l));
    (
        finite(),
        proptest::collection::vec(inclusion, 0..5),
        (finite(), finite()),
        (0usize..40, 1usize..200),
        proptest::option::of((0usize..500, 0usize..500)),
    )
        .prop_map(|(lm, inclusions, (a, theta), (order, q), grid)| RunConfig {
            matrix_conductivity: lm,
            inclusions,
            loading: Loading::new(a, theta),
            truncation: TruncationSpec { order, quadrature_points: q },
            grid: grid.map(|(nx, ny)| Grid { nx, ny }),
        })
}

proptest! {
    #[test]
    fn render_parse_round_trip(cfg in run_config()) {
        let text = render(&cfg);
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
