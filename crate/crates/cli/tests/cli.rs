use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn smirnov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smirnov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stderr_line(out: &Output) -> String {
    let s = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(s.lines().count(), 1, "stderr: {s}");
    s
}

#[test]
fn validate_disk_prints_perimeter() {
    let out = smirnov(&["validate", "--config", &config("disk.json")]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let perimeter: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("perimeter"))
        .expect("perimeter line")
        .trim()
        .parse()
        .unwrap();
    assert!((perimeter - std::f64::consts::TAU).abs() < 1e-12);
}

#[test]
fn map_on_disk_is_the_translation() {
    let dir = tempfile::tempdir().unwrap();
    let out = smirnov(&[
        "map",
        "--config",
        &config("disk.json"),
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "map.n=4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["boundary.csv", "interior.csv"] {
        let csv = fs::read_to_string(dir.path().join(file)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x,y,j_re,j_im,phi_re,phi_im");
        let mut count = 0;
        for line in lines {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((v[2] - v[0]).abs() <= 1e-9 && (v[3] - v[1]).abs() <= 1e-9, "{line}");
            count += 1;
        }
        assert!(count > 0);
    }
    assert!(dir.path().join("config.json").exists());
}

#[test]
fn rates_on_square_writes_a_row_per_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = smirnov(&[
        "rates",
        "--config",
        &config("square.json"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,err_p,err_sup,bound12,lead_coeff_scaled,zero_moment_gap"
    );
    let ns: Vec<usize> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ns, vec![8, 16, 24, 32, 48, 64, 96]);
    let svg = fs::read_to_string(dir.path().join("rates.svg")).unwrap();
    assert!(svg.contains("degree n"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary["power_fit"]["exponent"].as_f64().is_some());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let out = smirnov(&[
            "rates",
            "--config",
            &config("ellipse.json"),
            "--out",
            dir.path().to_str().unwrap(),
            "--set",
            "p=1",
            "--set",
            "n_list=[2,4,8,16]",
            "--workers",
            workers,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["rates.csv", "summary.json", "rates.svg", "config.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
    let copied = fs::read_to_string(a.path().join("config.json")).unwrap();
    assert!(copied.contains("\"p\": 1.0"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = smirnov(&["rates", "--config", &config("square.json"), "--out", d, "--set", "n_list=[8,4]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("error[config]:"));

    let out = smirnov(&["rates", "--config", "/nonexistent.json", "--out", d]);
    assert_eq!(out.status.code(), Some(1));
    stderr_line(&out);

    let out = smirnov(&["rates", "--config", &config("square.json"), "--out", d, "--set", "reference.kind=oracle"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("error[config]:"));

    let out = smirnov(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("error[usage]:"));
}

#[test]
fn numerical_failures_exit_two_with_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = smirnov(&[
        "zeros",
        "--config",
        &config("disk.json"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let line = stderr_line(&out);
    assert!(line.starts_with("error[zeros]:"), "{line}");
    assert!(line.contains("domain disk"));
}

#[test]
fn zeros_on_square_reports_a_best_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = smirnov(&[
        "zeros",
        "--config",
        &config("square.json"),
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "n_list=[16,32,64]",
        "--set",
        "reference.n_ref=128",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("zeros.json")).unwrap()).unwrap();
    assert_eq!(rep["rows"].as_array().unwrap().len(), 3);
    assert!(rep["best"][1].as_f64().unwrap() <= 0.15);
}
