use std::path::Path;
use std::process::{Command, Output};

use qsl_core::report::{read_csv, read_json, COLUMNS};

fn qsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_sweep(extra: &[&str]) -> Vec<String> {
    let mut args = vec![
        "jc-sweep",
        "--gamma0-min",
        "0.1",
        "--gamma0-max",
        "20",
        "--gamma0-count",
        "3",
        "--steps",
        "500",
    ];
    args.extend_from_slice(extra);
    args.into_iter().map(String::from).collect()
}

fn run(args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    qsl(&refs)
}

#[test]
fn sweep_csv_has_fixed_schema() {
    let out = run(&small_sweep(&[]));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
    assert_eq!(lines.count(), 3);

    let records = read_csv(text.as_bytes()).unwrap();
    assert_eq!(records[0].flags, "");
    assert_eq!(records[2].flags, "AMPLITUDE_GUARD");
    assert!(records[2].info_rate_exact.is_nan());
    assert!(records[0].info_rate_exact <= records[0].bound_micro_with_additive);
}

#[test]
fn sweep_json_matches_csv() {
    let csv = run(&small_sweep(&[]));
    let json = run(&small_sweep(&["--format", "json"]));
    assert!(json.status.success());
    let from_csv = read_csv(csv.stdout.as_slice()).unwrap();
    let from_json = read_json(json.stdout.as_slice()).unwrap();
    assert_eq!(from_csv.len(), from_json.len());
    for (a, b) in from_csv.iter().zip(&from_json) {
        assert_eq!(a.flags, b.flags);
        for (x, y) in [
            (a.gamma0, b.gamma0),
            (a.ell, b.ell),
            (a.info_rate_exact, b.info_rate_exact),
        ] {
            assert!(x == y || (x.is_nan() && y.is_nan()) || ((x - y) / y).abs() < 1e-12);
        }
    }
    let text = String::from_utf8(json.stdout).unwrap();
    for key in COLUMNS {
        assert!(text.contains(&format!("\"{key}\"")), "missing {key}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    std::fs::write(
        &config,
        r#"{"tau": 0.5, "steps": 300, "gamma0_grid": {"min": 0.1, "max": 0.2, "count": 2}}"#,
    )
    .unwrap();
    let output = dir.path().join("rows.csv");
    let out = qsl(&[
        "jc-sweep",
        "--config",
        config.to_str().unwrap(),
        "--tau",
        "0.25",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let records = read_csv(std::fs::File::open(&output).unwrap()).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.tau == 0.25));
    assert_eq!(records[1].gamma0, 0.2);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "{\"tau\": ").unwrap();
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"taux": 1.0}"#).unwrap();

    let cases: Vec<Vec<&str>> = vec![
        vec!["jc-sweep", "--gamma0-count", "1"],
        vec!["jc-sweep", "--gamma0-min", "5", "--gamma0-max", "1"],
        vec!["jc-sweep", "--lambda", "0"],
        vec!["jc-sweep", "--workers", "0"],
        vec!["jc-sweep", "--config", bad_json.to_str().unwrap()],
        vec!["jc-sweep", "--config", unknown.to_str().unwrap()],
        vec!["jc-sweep", "--config", "/nonexistent/config.json"],
        vec!["jc-sweep", "--format", "xml"],
        vec!["rabi-demo", "--omega", "-1"],
        vec!["gibbs", "--energy", "1"],
        vec!["bounds"],
        vec!["no-such-command"],
    ];
    for args in cases {
        let out = qsl(&args);
        assert_eq!(
            out.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn runtime_errors_exit_with_two() {
    let out = qsl(&[
        "jc-sweep",
        "--gamma0-count",
        "2",
        "--steps",
        "100",
        "--output",
        "/nonexistent/dir/rows.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = qsl(&["gibbs", "--spectrum", "0,1", "--energy", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rabi_demo_reports_marginal_qsl() {
    let out = qsl(&[
        "rabi-demo",
        "--omega",
        "2",
        "--tau",
        &(std::f64::consts::PI / 2.0).to_string(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["tau_qsl_x"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    assert!((v["tau_qsl"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(v["shannon_rate"].as_f64().unwrap() <= v["bound_shannon"].as_f64().unwrap());
}

#[test]
fn gibbs_and_bounds_subcommands() {
    let out = qsl(&["gibbs", "--spectrum", "0,1", "--energy", "0.25"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["beta"].as_f64().unwrap() - 3f64.ln()).abs() < 1e-10);

    let out = qsl(&["gibbs", "--hbar-omega", "1", "--energy", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["levels"].as_u64().unwrap() > 10);

    let out = qsl(&["bounds", "--energy", "1", "--power", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["bekenstein_bits_per_time"].as_f64().unwrap() - 4.532360141827194).abs() < 1e-12);
    assert!((v["pendry_bits_per_time"].as_f64().unwrap() - 1.4763483667636275).abs() < 1e-12);
}

#[test]
fn output_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["1", "3"]
        .iter()
        .map(|w| dir.path().join(format!("w{w}.csv")))
        .collect();
    for (w, path) in ["1", "3"].iter().zip(&paths) {
        let mut args = small_sweep(&["--workers", w, "--output"]);
        args.push(path.to_str().unwrap().to_string());
        assert!(run(&args).status.success());
    }
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&paths[0]), read(&paths[1]));
}
