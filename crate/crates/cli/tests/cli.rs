use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gtcorners(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtcorners"))
        .args(args)
        .env_remove("GTCORNERS_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn value(out: &Output) -> f64 {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    stdout_json(out)["value"].as_f64().unwrap()
}

#[test]
fn scalar_examples() {
    let out = gtcorners(&["density", "eval", "--x", "[0,1]", "--k", "1", "--at", "[0.5]"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "{\"value\": 1.0}");
    assert_eq!(value(&gtcorners(&["volume", "--x", "[0,1,2]"])), 1.0);
    let tail = value(&gtcorners(&["spline", "integrate", "--knots", "[0,1,3]", "--from", "-inf", "--to", "inf"]));
    assert!((tail - 1.0).abs() < 1e-15);
    assert_eq!(value(&gtcorners(&["spline", "eval", "--knots", "[0,1]", "--at", "-0.5"])), 0.0);
    assert_eq!(value(&gtcorners(&["discrete", "dim", "--x", "[0,1,2]"])), 8.0);
}

#[test]
fn hciz_accepts_complex_pairs() {
    let out = gtcorners(&["hciz", "--x", "[0,1]", "--z", "[[0,1],0]"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    // (e^{i} - 1) / i
    let (re, im) = (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap());
    assert!((re - 1f64.sin()).abs() < 1e-14);
    assert!((im - (1.0 - 1f64.cos())).abs() < 1e-14);
}

#[test]
fn relative_dimension_is_a_fraction() {
    let out = gtcorners(&["discrete", "reldim", "--x", "[0,1,2]", "--y", "[1]"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1/2");
}

#[test]
fn json_arguments_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.json");
    std::fs::write(&path, "[0, 1, 2]").unwrap();
    let arg = format!("@{}", path.display());
    assert_eq!(value(&gtcorners(&["volume", "--x", &arg])), 1.0);
    let missing = gtcorners(&["volume", "--x", "@/nonexistent/x.json"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(gtcorners(&["volume", "--x", "[0,0,1]"]).status.code(), Some(1));
    assert_eq!(gtcorners(&["volume", "--x", "not json"]).status.code(), Some(1));
    assert_eq!(gtcorners(&["density", "eval", "--x", "[0,1]", "--k", "2", "--at", "[0,1]"]).status.code(), Some(1));
    assert_eq!(gtcorners(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(gtcorners(&["--help"]).status.code(), Some(0));
    let budget = gtcorners(&["discrete", "dim", "--x", "[0,1000,2000,3000,4000]"]);
    assert_eq!(budget.status.code(), Some(2));
    assert!(!budget.stderr.is_empty());
    let failed = gtcorners(&["verify", "hciz", "--n", "3", "--samples", "2", "--seed", "10"]);
    assert_eq!(failed.status.code(), Some(3));
    assert_eq!(stdout_json(&failed)["pass"], Value::Bool(false));
}

#[test]
fn full_verification_passes() {
    let out = gtcorners(&["verify", "all", "--n", "4", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = stdout_json(&out);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() > 10);
    for c in checks {
        assert_eq!(c["pass"], Value::Bool(true), "{c}");
        for key in ["test", "statistic", "threshold"] {
            assert!(c.get(key).is_some());
        }
    }
}

fn run_to_file(args: &[&str], path: &Path) -> Vec<u8> {
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    full.extend(["--out", p]);
    let out = gtcorners(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn density_grid_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["density", "grid", "--x", "[0,1,3,4]", "--k", "2", "--grid", "0:4:21,0:4:21"];
    let a = run_to_file(&args, &dir.path().join("a.csv"));
    let b = run_to_file(&args, &dir.path().join("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a1,a2,density"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 441);
    for r in &rows {
        if r[0] > r[1] {
            assert_eq!(r[2], 0.0);
        }
        assert!(r[2] >= 0.0);
    }
    // Riemann sum over the chamber is close to one
    let h = 0.2;
    let mass: f64 = rows.iter().filter(|r| r[0] < r[1]).map(|r| r[2] * h * h).sum();
    assert!((mass - 1.0).abs() < 0.15, "{mass}");
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["sample", "--x", "[0,1,3,7]", "--k", "2", "--n", "3000", "--seed", "42"];
    let mut det = base.to_vec();
    det.push("--deterministic");
    let a = run_to_file(&det, &dir.path().join("a.csv"));
    let b = run_to_file(&det, &dir.path().join("b.csv"));
    assert_eq!(a, b);
    let mut threaded = base.to_vec();
    threaded.extend(["--threads", "4"]);
    assert_eq!(a, run_to_file(&threaded, &dir.path().join("c.csv")));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 3001);
    let other = run_to_file(
        &["sample", "--x", "[0,1,3,7]", "--k", "2", "--n", "3000", "--seed", "43"],
        &dir.path().join("d.csv"),
    );
    assert_ne!(text.as_bytes(), other.as_slice());
}

#[test]
fn pattern_lines_interlace() {
    let out = gtcorners(&["sample", "pattern", "--x", "[0,1,3]", "--n", "50", "--seed", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 50);
    for line in text.lines() {
        let rows: Vec<Vec<f64>> = serde_json::from_str(line).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0], vec![0.0, 1.0, 3.0]);
        for m in 1..rows.len() {
            for (i, &v) in rows[m].iter().enumerate() {
                assert!(rows[m - 1][i] - 1e-12 <= v && v <= rows[m - 1][i + 1] + 1e-12);
            }
        }
    }
}

#[test]
fn limit_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut diffs = Vec::new();
    for l in ["10", "20", "40"] {
        let csv = run_to_file(
            &["discrete", "limit", "--x", "[0,1,2]", "--k", "1", "--l", l, "--points", "[[1.0]]"],
            &dir.path().join(format!("{l}.csv")),
        );
        let text = String::from_utf8(csv).unwrap();
        let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        diffs.push(row[3]);
    }
    assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2], "{diffs:?}");
}
