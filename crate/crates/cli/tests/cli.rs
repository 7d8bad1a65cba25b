use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const DPO: &str = r#"model={"model": "dpo", "omega": 1.0, "lambda": 0.2}"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paramosc"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn classify_reports_no_periodic_pairs() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        &[
            "classify-ince",
            "--set",
            r#"model={"model": "dpo", "omega": 1.0, "lambda": 0.5}"#,
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let report = json(&tmp.path().join("periodicity.json"));
    assert_eq!(report["pi_pair_possible"], false);
    assert_eq!(report["two_pi_pair_possible"], false);
    assert_eq!(report["min_p"], 0.0625);
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"model": {"model": "dpo", "lambda": 0.5}}"#).unwrap();
    let out = run(tmp.path(), &["green", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("model") && stderr.contains("omega"),
        "{stderr}"
    );

    let out = run(
        tmp.path(),
        &["solve-mu", "--set", DPO, "--set", "solve.t_mx=2"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_mx"));

    assert_eq!(run(tmp.path(), &["solve-mu"]).status.code(), Some(1));
    assert_eq!(run(tmp.path(), &["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        run(tmp.path(), &["green", "--jobs", "0"]).status.code(),
        Some(1)
    );
}

#[test]
fn validate_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        &[
            "validate",
            "--set",
            r#"validate.suites=["special_case", "green_coefficients"]"#,
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let report = json(&tmp.path().join("validation.json"));
    assert_eq!(report["passed"], true);
    assert_eq!(report["suites"][0]["criterion"], 1);
    assert!(
        report["suites"][0]["checks"][0]["measured"]
            .as_f64()
            .unwrap()
            <= 1e-8
    );

    let out = run(
        tmp.path(),
        &[
            "validate",
            "--set",
            r#"validate.suites=["special_case"]"#,
            "--set",
            "validate.tolerances.special_case_mu=1e-20",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&tmp.path().join("validation.json"))["passed"], false);
}

#[test]
fn solve_mu_writes_units_and_caustics() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        &[
            "solve-mu",
            "--set",
            r#"model={"model": "dpo", "omega": 1.0, "lambda": 0.0}"#,
            "--set",
            "solve.t_max=4",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&tmp.path().join("mu.csv"));
    assert_eq!(header[0], "t [time]");
    assert!(header.iter().all(|h| h.contains('[')));
    assert_eq!(rows.len(), 201);
    for r in &rows {
        assert!((r[1] - r[0].sin()).abs() < 1e-8);
        assert!((r[3] - r[0].cos()).abs() < 1e-8);
    }
    let zeros = json(&tmp.path().join("mu_zeros.json"));
    assert!((zeros["mu0_zeros"][0].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = [
        "green",
        "--set",
        DPO,
        "--set",
        "green.times=[0.3, 1.1]",
        "--set",
        r#"green.kernel={"y": 0.5, "grid": {"x_min": -2, "x_max": 2, "n": 33}}"#,
    ];
    assert_eq!(run(a.path(), &args).status.code(), Some(0));
    assert_eq!(run(b.path(), &args).status.code(), Some(0));
    for name in ["coefficients.json", "kernel.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
    let (header, rows) = csv_rows(&a.path().join("kernel.csv"));
    assert_eq!(header.len(), 5);
    assert_eq!(rows.len(), 66);
}

#[test]
fn propagation_methods_agree() {
    let grid = r#"propagate.grid={"x_min": -10, "x_max": 10, "n": 2048}"#;
    let mut fields = Vec::new();
    for method in ["quadrature", "analytic", "crank_nicolson"] {
        let tmp = TempDir::new().unwrap();
        let m = format!("propagate.method={method}");
        let out = run(
            tmp.path(),
            &[
                "propagate",
                "--set",
                DPO,
                "--set",
                grid,
                "--set",
                &m,
                "--set",
                "propagate.times=[0.5, 1.0]",
            ],
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let summary = json(&tmp.path().join("fields.json"));
        assert_eq!(summary.as_array().unwrap().len(), 3);
        assert!((summary[2]["norm"].as_f64().unwrap() - 1.0).abs() < 1e-6);
        fields.push(csv_rows(&tmp.path().join("field_002.csv")).1);
    }
    let dist = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2))
            .sum::<f64>()
            .sqrt()
            / a.iter().map(|p| p[3]).sum::<f64>().sqrt()
    };
    assert!(dist(&fields[0], &fields[1]) < 1e-8);
    assert!(dist(&fields[0], &fields[2]) < 1e-4);
}

#[test]
fn eigenstate_report() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        &["eigenstates", "--set", DPO, "--set", "eigenstates.n_max=3"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&tmp.path().join("gram.json"));
    let snaps = report["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 3);
    for s in snaps {
        assert!(s["gram_max_deviation"].as_f64().unwrap() < 1e-8);
        for (n, e) in s["invariant_expectation"]
            .as_array()
            .unwrap()
            .iter()
            .enumerate()
        {
            assert!((e.as_f64().unwrap() - 2.0 * (n as f64 + 0.5)).abs() < 1e-6);
        }
    }
    let (header, rows) = csv_rows(&tmp.path().join("eigenstates_001.csv"));
    assert_eq!(header.len(), 9);
    assert_eq!(rows.len(), 2048);
}

#[test]
fn sweeps_run_in_parallel_with_identical_results() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("sweep.json");
    fs::write(
        &cfg,
        r#"{
            "model": {"model": "dpo", "omega": 1.0, "lambda": 0.1},
            "sweep": [{"model.lambda": 0.2}, {"model.lambda": 0.5}, {"model.lambda": 0.8}]
        }"#,
    )
    .unwrap();
    let (one, four) = (tmp.path().join("one"), tmp.path().join("four"));
    let c = cfg.to_str().unwrap();
    assert_eq!(
        run(&one, &["classify-ince", "--config", c]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&four, &["classify-ince", "--config", c, "--jobs", "4"])
            .status
            .code(),
        Some(0)
    );
    for i in 0..3 {
        let name = format!("sweep_{i:03}/periodicity.json");
        assert_eq!(
            fs::read(one.join(&name)).unwrap(),
            fs::read(four.join(&name)).unwrap()
        );
    }
    let r = json(&one.join("sweep_001/periodicity.json"));
    assert_eq!(r["min_p"], 0.0625);
    assert_eq!(json(&one.join("sweep.json"))[2]["status"], "ok");
}
