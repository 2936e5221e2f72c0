use std::process::{Command, Output};

fn qleg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qleg")).args(args).env_remove("QLEG_MAX_TERMS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(o.stdout.as_slice()).records().map(|r| r.unwrap()).collect()
}

#[test]
fn eval_examples() {
    let o = qleg(&["eval", "little-q-jacobi", "--n", "0", "--a", "0.2", "--b", "0.9", "--q", "0.3", "--x", "-0.4,0.5,1.7"]);
    assert!(o.status.success());
    assert!(csv_rows(&o).iter().all(|r| &r[3] == "1.0"));

    let o = qleg(&["eval", "monic-big00", "--n", "1", "--c", "0.8", "--d", "0.2", "--q", "0.5", "--x", "0.3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!((v["value"].as_f64().unwrap() + 0.3).abs() < 1e-15);

    let o = qleg(&["eval", "chebyshev", "--m", "2", "--t", "0.6"]);
    let rows = csv_rows(&o);
    assert!((rows[0][3].parse::<f64>().unwrap() + 0.28).abs() < 1e-15);
}

#[test]
fn eval_in_extended_precision() {
    let o = qleg(&["eval", "big-q-legendre", "--n", "3", "--c", "1", "--d", "0.5", "--q", "0.4", "--x", "0.2", "--precision", "extended"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = qleg(&["eval", "big-q-legendre", "--n", "3", "--c", "1", "--d", "0.5", "--q", "0.4", "--x", "0.2"]);
    let a: f64 = csv_rows(&o)[0][3].parse().unwrap();
    let b: f64 = csv_rows(&d)[0][3].parse().unwrap();
    assert!((a - b).abs() < 1e-14);
}

#[test]
fn verify_trivial_addition_passes() {
    let o = qleg(&["verify", "addition", "--l", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.is_empty());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["identity_id", "params", "lhs", "rhs", "abs_residual", "rel_residual", "tolerance", "passed", "truncation"] {
            assert!(v.get(key).is_some(), "missing {key} in {line}");
        }
        assert_eq!(v["passed"], true);
    }
}

#[test]
fn verify_operator_at_tighter_tolerance() {
    let o = qleg(&["verify", "operator", "--l", "1", "--dim", "50", "--tol", "1e-10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_output_is_deterministic() {
    let a = qleg(&["verify", "cross-path", "--seed", "11"]);
    let b = qleg(&["verify", "cross-path", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let c = qleg(&["verify", "cross-path", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn output_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("charlier.jsonl");
    let o = qleg(&["verify", "charlier", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 588);
}

#[test]
fn failed_report_exits_one() {
    // A zero tolerance fails every report with a rounding residual.
    let o = qleg(&["verify", "addition", "--l", "3", "--p", "2", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"passed\":false"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(qleg(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(qleg(&["eval", "big-q-legendre", "--n", "2", "--x", "0.1"]).status.code(), Some(2));
    assert_eq!(qleg(&["spectrum", "--q", "1.5"]).status.code(), Some(2));
    assert_eq!(qleg(&["frobnicate"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_qleg"))
        .args(["verify", "charlier"])
        .env("QLEG_MAX_TERMS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_three() {
    let o = Command::new(env!("CARGO_BIN_EXE_qleg"))
        .args(["verify", "orthogonality"])
        .env("QLEG_MAX_TERMS", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn spectrum_pairs_at_sigma_zero() {
    let o = qleg(&["spectrum", "--sigma", "0", "--q", "0.5", "--dim", "60", "--count", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 6);
    for pair in rows.chunks(2) {
        let a: f64 = pair[0][1].parse().unwrap();
        let b: f64 = pair[1][1].parse().unwrap();
        assert!((a + b).abs() < 1e-12, "{a} {b}");
        let x: i32 = pair[0][3].parse().unwrap();
        assert!((a.abs() - 0.25f64.powi(x)).abs() < 1e-12);
    }
}

#[test]
fn two_by_two_spectrum_is_the_quadratic_roots() {
    let (q, sigma) = (0.6f64, 0.7f64);
    let o = qleg(&["spectrum", "--sigma", "0.7", "--q", "0.6", "--dim", "2", "--count", "2", "--tol", "1"]);
    let rows = csv_rows(&o);
    let got: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let s = 1.0 - q.powf(2.0 * sigma);
    let (b0, b1) = (-s, -q * q * s);
    let a0 = q.powf(sigma) * (1.0 - q * q).sqrt();
    let mid = 0.5 * (b0 + b1);
    let rad = (0.25 * (b0 - b1).powi(2) + a0 * a0).sqrt();
    let mut want = [mid + rad, mid - rad];
    want.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-15, "{g} vs {w}");
    }
}

#[test]
fn empty_spectrum() {
    let o = qleg(&["spectrum", "--q", "0.5", "--count", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "rank,eigenvalue,branch,x,predicted,deviation");
}

#[test]
fn limit_scan_table() {
    let o = qleg(&["limit-scan", "dual-q-krawtchouk", "--n", "2", "--m", "1", "--c", "1", "--d", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["p", "q", "probe", "q_value", "limit_value", "abs_error"]);
    let errors: Vec<f64> = reader.records().map(|r| r.unwrap()[5].parse().unwrap()).collect();
    assert_eq!(errors.len(), 4);
    assert!(errors.windows(2).all(|w| w[1] < w[0]));

    let o = qleg(&["limit-scan", "kernel", "--coeffs", "0,0,1", "--m", "2", "--p", "4,8,16,32,64"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn limit_scan_that_misses_the_cap_fails() {
    let o = qleg(&["limit-scan", "little-q-jacobi", "--n", "2", "--alpha", "1", "--beta", "1", "--cap", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
}
