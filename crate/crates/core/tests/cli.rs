//! The `pslab` binary, end to end.

use std::process::{Command, Output};

use serde_json::Value;

fn pslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pslab"))
        .args(args)
        .env_remove("PSLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn payload(o: &Output) -> Value {
    let v: Value = serde_json::from_str(&stdout(o)).expect("JSON on stdout");
    assert_eq!(v["schema"], 1);
    v["payload"].clone()
}

#[test]
fn derive_reports_xi() {
    let o = pslab(&["derive", "--c", "1.05", "--n", "1e9", "--e-power", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let p = payload(&o);
    let xi = p["params"]["xi"].as_f64().unwrap();
    assert!((xi - 0.3756).abs() < 1e-12, "{xi}");
    assert_eq!(p["defaults_used"], true);
    assert_eq!(p["validation"].as_array().unwrap().len(), 0);
}

#[test]
fn derive_lists_violations_and_succeeds() {
    let o = pslab(&["derive", "--c", "1.2", "--n", "1e9"]);
    assert_eq!(o.status.code(), Some(0));
    let p = payload(&o);
    let names: Vec<&str> = p["validation"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["constraint"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"1 < c < 15/14"), "{names:?}");
    let o = pslab(&["validate", "--c", "1.2", "--n", "1e9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors() {
    assert_eq!(pslab(&["derive", "--c", "1.05"]).status.code(), Some(2));
    assert_eq!(pslab(&["derive", "--c", "x", "--n", "1e9"]).status.code(), Some(2));
    assert_eq!(pslab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pslab(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# desk run\nc = 1.05\nn = 1e9\nx = 5000\n").unwrap();
    let o = pslab(&["derive", "--config", cfg.to_str().unwrap(), "-O", "delta=0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let p = payload(&o);
    assert_eq!(p["params"]["x"].as_f64(), Some(5000.0));
    assert_eq!(p["params"]["delta_width"].as_f64(), Some(0.25));
    assert_eq!(p["defaults_used"], false);
}

#[test]
fn solve_test_mode_writes_oracle_triples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solutions.csv");
    let o = pslab(&[
        "solve", "--c", "1", "--n", "21", "-O", "test_mode=1", "-O", "x=20", "-O", "mu=0.1", "-O", "z=3",
        "-O", "d=9", "-O", "delta=0.5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p1,p2,p3,value,omega1,omega2,omega3"));
    let rows: Vec<Vec<u64>> = lines
        .map(|l| l.split(',').take(3).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.iter().sum::<u64>() == 21));
    assert_eq!(rows[0], vec![3, 5, 13]);
    // No temporary files left behind.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn grid_with_no_points_is_header_only() {
    let o = pslab(&["grid", "--c", "1.05", "--n", "1e4", "--points", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x,re,im,abs\n");
}

#[test]
fn grid_is_conjugate_symmetric() {
    let o = pslab(&[
        "expsum", "grid", "--c", "1.05", "--n", "1e4", "-O", "x=3000", "--x-min", "-0.5", "--x-max", "0.5",
        "--points", "3", "--mode", "moebius",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][1], rows[2][1]);
    assert_eq!(rows[0][2], -rows[2][2]);
    assert_eq!(rows[1][2], 0.0);
}

#[test]
fn verify_kernel_suite_only() {
    let o = pslab(&["verify", "--suite", "kernel"]);
    assert_eq!(o.status.code(), Some(0));
    let p = payload(&o);
    let checks = p["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["suite"] == "kernel" && c["passed"] == true));
}

#[test]
fn verify_catches_injected_fault() {
    let o = pslab(&["verify", "--suite", "sieve", "--inject-fault", "sandwich"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("FAIL sieve/sandwich"), "{err}");
}

#[test]
fn degenerate_sieve_summary() {
    let o = pslab(&["sieve", "summary", "--z", "2.5", "--d-level", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let p = payload(&o);
    for key in ["frak_p", "frak_n_plus", "frak_n_minus"] {
        assert_eq!(p[key].as_f64(), Some(1.0), "{key}");
    }
}

#[test]
fn degenerate_sieve_report() {
    let o = pslab(&[
        "gamma", "report", "--c", "1.05", "--n", "1000", "-O", "x=700", "-O", "z=2.5", "-O", "d=10", "-O",
        "force=1", "-O", "delta=2", "-O", "r=4", "--no-fourier",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let p = payload(&o);
    assert_eq!(p["sieve"]["frak_n_plus"].as_f64(), Some(1.0));
    assert_eq!(p["sieve"]["frak_n_minus"].as_f64(), Some(1.0));
    assert_eq!(p["gamma_prime"], p["gamma1"]);
    assert_eq!(p["exact_inequalities_hold"], true);
}

#[test]
fn table_dumps() {
    let o = pslab(&["primes-dump", "--lo", "1", "--hi", "30"]);
    let text = stdout(&o);
    assert!(text.starts_with("p,log_p,omega_p_plus_2\n2,"));
    assert_eq!(text.lines().count(), 11);

    let o = pslab(&["sieve-table", "--z", "10", "--d-level", "100"]);
    assert!(stdout(&o).starts_with("d,lambda_plus,lambda_minus\n1,1,1\n"));

    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.txt");
    std::fs::write(&grid, "0\n# comment\n1.5\n").unwrap();
    let o = pslab(&["kernel-dump", "--r", "2", "--grid-file", grid.to_str().unwrap()]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], "x,theta_hat,bound");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.0000000000000000e0,1.7500000000000000e0,"));

    let o = pslab(&["primes", "dump", "--lo", "1", "--hi", "10", "--format", "json"]);
    let p = payload(&o);
    assert_eq!(p[0]["p"], 2);
    assert_eq!(p.as_array().unwrap().len(), 4);
}

#[test]
fn io_error_names_the_path() {
    let o = pslab(&["sieve-table", "--z", "10", "--d-level", "100", "--out", "/nonexistent/dir/t.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/dir"));
}
