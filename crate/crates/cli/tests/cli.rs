use std::path::Path;
use std::process::{Command, Output};

fn holext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holext")).args(args).output().expect("spawn holext")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.trim_start().strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in:\n{text}"))
        .trim()
        .to_string()
}

#[test]
fn eta_values() {
    let o = holext(&["eta", "--z", "0,1"]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.768225422326057).abs() < 1e-14);

    let o = holext(&["eta", "--log", "--z", "0,10"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v + 10.0 * std::f64::consts::PI / 12.0).abs() < 1e-13);
}

#[test]
fn eta_rejects_lower_half_plane() {
    let o = holext(&["eta", "--z", "0,-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Im(z) must be positive"));
}

#[test]
fn malformed_complex_is_input_error() {
    assert_eq!(holext(&["eta", "--z", "1;2"]).status.code(), Some(2));
    assert_eq!(holext(&["eta", "--z", "nan,1"]).status.code(), Some(2));
}

#[test]
fn torus_det_paper_value() {
    let o = holext(&["torus-det", "--z", "0,1", "--method", "paper"]);
    assert!(o.status.success());
    let v: f64 = field(&stdout(&o), "paper_log_det").parse().unwrap();
    assert!((v - 1.31053292591151).abs() < 1e-12);
    assert!((v - 1.31057).abs() < 1e-4);
}

#[test]
fn torus_det_is_translation_invariant() {
    let a = holext(&["torus-det", "--z", "0,1"]);
    let b = holext(&["torus-det", "--z", "1,1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn potential_constant_form() {
    // (2i - i)(-2i + i) with bases (i, -i)
    let o = holext(&["potential", "--form", "const1", "--at", "0,2;0,-2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(field(&out, "q"), "1.00000000000000");
    assert_eq!(field(&out, "q"), field(&out, "closed_form"));
}

#[test]
fn potential_verify_accepts_closed_form() {
    let o = holext(&["potential", "--form", "wp_genus1", "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = holext(&["potential", "--form", "wp_genus1", "--at", "0,2;0,-2", "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    let q: f64 = field(&out, "q").parse().unwrap();
    // log(4i) - log(3i) - log(3i) + log(2i)
    assert!((q - (8.0f64 / 9.0).ln()).abs() < 1e-13);
}

#[test]
fn potential_verify_rejects_nonclosed_form() {
    let o = holext(&["potential", "--form", "bad_nonclosed", "--verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL]"));
}

#[test]
fn potential_unknown_form_is_input_error() {
    let o = holext(&["potential", "--form", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("const1"));
}

#[test]
fn potential_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let o = holext(&["potential", "--form", "const1", "--grid", "0,1,2;0,1,3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "re_z");
    assert_eq!(&headers[7], "status");
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    // x varies fastest
    assert_eq!((&rows[1][0], &rows[1][1]), ("1", "0"));
    assert_eq!((&rows[2][0], &rows[2][1]), ("0", "0.5"));
    assert!(rows.iter().all(|r| &r[7] == "ok"));
}

#[test]
fn extend_genus1_value_and_checks() {
    let o = holext(&[
        "extend", "--point", "0.1,1.2;-0.3,-0.8", "--check", "invariance", "--check", "diagonal", "--check", "holomorphy",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(field(&out, "value").starts_with("0.406794348487218"));
    assert!(!out.contains("[FAIL]"));
}

#[test]
fn extend_at_i() {
    let o = holext(&["extend", "--point", "0,1;0,-1", "--check", "diagonal"]);
    assert!(o.status.success());
    let v: f64 = field(&stdout(&o), "value").parse().unwrap();
    assert!((v - 0.391594392706836).abs() < 1e-14);
    assert!((v - 0.39162).abs() < 1e-4);
}

#[test]
fn extend_rejects_point_outside_domain() {
    let o = holext(&["extend", "--point", "0.1,1.2;-0.3,0.8"]);
    assert_eq!(o.status.code(), Some(2));
}

fn write_samples(path: &Path, function: &str, degree: &str) {
    let o = holext(&[
        "samples", "--function", function, "--center", "0,1.5", "--radius", "0.3", "--degree", degree, "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn polarize_recovers_abs2() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    let fit = dir.path().join("fit.json");
    write_samples(&samples, "abs2", "2");
    let o = holext(&["polarize", "--samples", samples.to_str().unwrap(), "--degree", "2", "--out", fit.to_str().unwrap()]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&fit).unwrap()).unwrap();
    assert_eq!(json["degree"], 2);
    assert!(json["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn polarize_against_genus1() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    write_samples(&samples, "paper-det", "8");
    let o = holext(&["polarize", "--samples", samples.to_str().unwrap(), "--degree", "8", "--against-genus1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn polarize_with_too_few_samples() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    std::fs::write(&samples, "re_z,im_z,re_val\n0,1.5,1\n0.1,1.5,2\n0,1.6,3\n").unwrap();
    let o = holext(&["polarize", "--samples", samples.to_str().unwrap(), "--degree", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient samples"));
}

#[test]
fn polarize_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    std::fs::write(&samples, "re_z,im_z,re_val\n0,abc,1\n").unwrap();
    let o = holext(&["polarize", "--samples", samples.to_str().unwrap(), "--degree", "1"]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(&samples, "x,y\n0,1\n").unwrap();
    let o = holext(&["polarize", "--samples", samples.to_str().unwrap(), "--degree", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_all_fast_is_deterministic() {
    let start = std::time::Instant::now();
    let a = holext(&["verify-all", "--fast"]);
    assert!(start.elapsed().as_secs_f64() < 15.0);
    let b = holext(&["verify-all", "--fast"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let json: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["command"], "verify-all");
    let stderr = String::from_utf8_lossy(&a.stderr);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("criterion")).count(), 10);
}
