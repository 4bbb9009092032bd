use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn oumle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oumle")).args(args).output().expect("spawn oumle")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rd = csv::Reader::from_path(p).unwrap();
    let h = rd.headers().unwrap().iter().map(String::from).collect();
    let rows = rd.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (h, rows)
}

fn col(h: &[String], name: &str) -> usize {
    h.iter().position(|c| c == name).unwrap_or_else(|| panic!("missing column {name}"))
}

#[test]
fn simulate_defaults_write_full_path_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("path.csv");
    let o = oumle(&["simulate", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out);
    assert_eq!(h, ["t", "y"]);
    assert_eq!(rows.len(), 5001);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[5000][0].parse::<f64>().unwrap(), 50.0);
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("path.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seeds"][0], 42);
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_batches_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    let args = |p: &Path, seed: &str| {
        oumle(&["simulate", "--paths", "20", "--steps", "100", "--horizon", "5", "--seed", seed, "--out", s(p)])
    };
    assert!(args(&a, "7").status.success());
    assert!(args(&b, "7").status.success());
    assert!(args(&c, "8").status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    let (h, rows) = read_csv(&a);
    assert_eq!(h, ["path_id", "t", "y"]);
    assert_eq!(rows.len(), 20 * 101);
}

#[test]
fn table1_matches_reference_outside_documented_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.csv");
    let o = oumle(&["table1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = read_csv(&out);
    let (rh, reference) = read_csv(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/table1_reference.csv")));
    assert_eq!(rows.len(), 84);
    let f = |r: &[String], h: &[String], c: &str| r[col(h, c)].parse::<f64>().unwrap();
    let mut compared = 0;
    for (r, g) in rows.iter().zip(&reference) {
        let key = |r: &[String], h: &[String]| (f(r, h, "lambda"), f(r, h, "alpha"), f(r, h, "T"));
        assert_eq!(key(r, &h), key(g, &rh));
        let (l, _, t) = key(r, &h);
        if l == 0.01 {
            continue;
        }
        assert!((f(r, &h, "bias") - f(g, &rh, "bias")).abs() <= 0.001, "{r:?} vs {g:?}");
        if !(l == 0.1 && t == 175.0) {
            assert!((f(r, &h, "mse") - f(g, &rh, "mse")).abs() <= 0.001, "{r:?} vs {g:?}");
        }
        compared += 1;
    }
    assert_eq!(compared, 56);
}

#[test]
fn curves_approach_two_and_reject_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = oumle(&["curves", "--t-grid", "100,200", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out);
    let at200: Vec<_> = rows.iter().filter(|r| r[col(&h, "T")] == "200").collect();
    assert_eq!(at200.len(), 4);
    for r in at200 {
        for c in ["f1", "f2"] {
            let v: f64 = r[col(&h, c)].parse().unwrap();
            assert!((1.8..=2.2).contains(&v), "{c} = {v}");
        }
    }
    let o = oumle(&["curves", "--lambda=-1", "--t-grid", "16,20", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = read_csv(&out);
    for t in ["16", "20"] {
        let f1: Vec<f64> = rows.iter().filter(|r| r[col(&h, "T")] == t).map(|r| r[col(&h, "f1")].parse().unwrap()).collect();
        let spread = f1.iter().cloned().fold(f64::MIN, f64::max) - f1.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.02);
    }
    assert_eq!(oumle(&["curves", "--t-count", "0"]).status.code(), Some(2));
}

#[test]
fn estimate_on_constant_path_with_known_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    let mut text = String::from("t,y\n");
    for k in 0..=100 {
        text += &format!("{},{}\n", k as f64 * 0.1, 0.75);
    }
    fs::write(&input, text).unwrap();
    let out = dir.path().join("e.json");
    let o = oumle(&["estimate", "--input", s(&input), "--known-lambda", "2", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let reports = v["paths"][0]["reports"].as_array().unwrap();
    let alpha = reports.iter().find(|r| r["estimator_kind"] == "alpha_hat_given_lambda").unwrap();
    assert!((alpha["value"].as_f64().unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn estimate_without_known_parameters_reports_joint_pair() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("batch.csv");
    let o = oumle(&["simulate", "--paths", "200", "--steps", "500", "--horizon", "20", "--y0", "0", "--out", s(&input)]);
    assert!(o.status.success());
    let out = dir.path().join("e.json");
    let o = oumle(&["estimate", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["paths"].as_array().unwrap().len(), 200);
    let kinds: Vec<&str> = v["paths"][0]["reports"].as_array().unwrap().iter().map(|r| r["estimator_kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["alpha_bar", "lambda_bar"]);
    let summary = v["summary"].as_array().unwrap();
    let lb = summary.iter().find(|s| s["estimator_kind"] == "lambda_bar").unwrap();
    let ab = summary.iter().find(|s| s["estimator_kind"] == "alpha_bar").unwrap();
    let se = |s: &Value| s["std_dev"].as_f64().unwrap() / (s["n"].as_f64().unwrap()).sqrt();
    assert!((ab["mean"].as_f64().unwrap() - 0.0).abs() < 4.0 * se(ab));
    assert!(lb["mean"].as_f64().unwrap() > 1.0);
    assert!((lb["mean"].as_f64().unwrap() - 1.2).abs() < 4.0 * se(lb) + 0.05);
}

#[test]
fn estimate_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "t,y\n0,1\n0.1,abc\n").unwrap();
    let o = oumle(&["estimate", "--input", s(&input)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn cdf_output_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cdf.csv");
    let o = oumle(&["cdf", "--horizon", "10", "--x-count", "30", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out);
    assert_eq!(h, ["x", "cdf", "err_flag", "method"]);
    let v: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(v.len(), 30);
    assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    assert!(rows.iter().all(|r| r[2].is_empty() && r[3] == "fourier"));
}

#[test]
fn validate_quick_passes() {
    let o = oumle(&["validate", "--quick"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(o.status.code(), Some(0), "{err}");
    assert!(err.contains("22 of 22 checks passed"), "{err}");
}

#[test]
fn replay_reproduces_digests() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = oumle(&["sweep", "--horizon", "5", "--steps-grid", "50,100", "--paths", "300", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = dir.path().join("sweep.csv.manifest.json");
    let before = fs::read(&out).unwrap();
    fs::write(&out, "tampered").unwrap();
    let o = oumle(&["replay", "--manifest", s(&manifest)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("identical"));
    assert_eq!(fs::read(&out).unwrap(), before);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(oumle(&["simulate", "--steps", "0"]).status.code(), Some(2));
    assert_eq!(oumle(&["nonsense"]).status.code(), Some(2));
    assert_eq!(oumle(&["simulate", "--sigma", "-1"]).status.code(), Some(2));
}
