use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mfcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfcd")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = mfcd(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_owned();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn defaults_are_the_headline_run() {
    let cfg = json(&run_ok(&["anneal", "--dry-run"]));
    assert_eq!(cfg["coupling"], 1.0);
    assert_eq!(cfg["field"], 1e-3);
    assert_eq!(cfg["spins"], 1000);
    assert_eq!(cfg["t_f"], 1.0);
    assert_eq!(cfg["schedule"]["kind"], "polynomial-quintic");
    assert_eq!(cfg["assist"], "mean-field");
}

#[test]
fn every_subcommand_supports_dry_run() {
    for sub in ["anneal", "sweep-n", "sweep-tf", "meanfield-trace", "variational-compare", "twolevel-demo", "diagnostics"] {
        assert_eq!(json(&run_ok(&[sub, "--dry-run"]))["subcommand"], sub);
    }
}

#[test]
fn flags_override_file_override_defaults() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "spins = 50\nt_f = 2.0\nassist = \"variational\"\n").unwrap();
    let c = json(&run_ok(&["anneal", "--dry-run", "--config", cfg.to_str().unwrap(), "--spins", "20"]));
    assert_eq!(c["spins"], 20);
    assert_eq!(c["t_f"], 2.0);
    assert_eq!(c["assist"], "variational");
    assert_eq!(c["field"], 1e-3);
}

#[test]
fn invalid_config_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "spins = 50\nbogus = 1\n").unwrap();
    let out = mfcd(&["anneal", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    assert_eq!(mfcd(&["anneal", "--spins", "0", "--dry-run"]).status.code(), Some(2));
    assert_eq!(mfcd(&["anneal", "--schedule", "custom", "--dry-run"]).status.code(), Some(2));
}

#[test]
fn headline_anneal_writes_trajectory_and_summary() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["anneal", "--out", out]);
    let (header, rows) = csv_rows(&dir.path().join("anneal.csv"));
    assert_eq!(header, "s,gamma,theta_dot,mx,my,mz,fidelity,norm_defect");
    assert_eq!(rows.len(), 201);
    assert!(!dir.path().join("anneal.gp").exists());
    let summary = json(&fs::read_to_string(dir.path().join("anneal.json")).unwrap());
    let mz = summary["final_mz"].as_f64().unwrap();
    assert!((0.993..=1.0).contains(&mz), "final mz {mz}");
    assert_eq!(summary["parameters"]["spins"], 1000);
    assert!(summary["wall_time_seconds"].as_f64().unwrap() > 0.0);

    let bare = TempDir::new().unwrap();
    run_ok(&["anneal", "--assist", "none", "--out", bare.path().to_str().unwrap()]);
    let summary = json(&fs::read_to_string(bare.path().join("anneal.json")).unwrap());
    assert!(summary["final_mz"].as_f64().unwrap() <= 0.01);
}

#[test]
fn csv_output_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        run_ok(&["anneal", "--spins", "40", "--t-f", "0.2", "--n-outputs", "11", "--plot", "--out", d.path().to_str().unwrap()]);
    }
    let read = |d: &TempDir| fs::read(d.path().join("anneal.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(csv_rows(&a.path().join("anneal.csv")).1.len(), 11);
    assert!(fs::read_to_string(a.path().join("anneal.gp")).unwrap().contains("anneal.csv"));
}

#[test]
fn sweeps_aggregate_one_row_per_value() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["sweep-n", "--values", "100,300,1000", "--out", out]);
    let (header, rows) = csv_rows(&dir.path().join("sweep-n.csv"));
    assert_eq!(header, "N,final_mz,final_fidelity,min_fidelity");
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), [100.0, 300.0, 1000.0]);
    let finals: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let spread = finals.iter().cloned().fold(f64::MIN, f64::max) - finals.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.05, "{finals:?}");
    assert!(rows.iter().all(|r| r[3] <= r[2]));

    run_ok(&["sweep-tf", "--spins", "200", "--values", "0.1,1", "--out", out]);
    let (header, rows) = csv_rows(&dir.path().join("sweep-tf.csv"));
    assert_eq!(header, "t_f,final_mz,final_fidelity,min_fidelity");
    assert_eq!(rows.len(), 2);
    // shorter sweeps leave less time for the mean-field error to build up
    assert!(rows[0][2] > rows[1][2]);
}

#[test]
fn empty_sweep_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "values = []\n").unwrap();
    let out = mfcd(&["sweep-n", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(mfcd(&["sweep-n", "--values", "1.5", "--out", dir.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn field_traces() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["meanfield-trace", "--n-points", "51", "--out", out]);
    let (header, rows) = csv_rows(&dir.path().join("meanfield-trace.csv"));
    assert_eq!(header, "s,gamma,gamma_dot,mz,mz_dot,theta_dot,residual");
    assert_eq!(rows.len(), 51);
    assert!(rows.iter().all(|r| r[6].abs() < 1e-10 && r[3] > 0.0 && r[3] <= 1.0));

    run_ok(&["variational-compare", "--n-points", "21", "--out", out]);
    let (header, rows) = csv_rows(&dir.path().join("variational-compare.csv"));
    assert_eq!(header, "s,alpha,theta_dot,ratio");
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r[3].is_nan() || (r[1] / r[2] - r[3]).abs() < 1e-9));
}

#[test]
fn assisted_two_level_demo_stays_on_the_ground_state() {
    let dir = TempDir::new().unwrap();
    run_ok(&["twolevel-demo", "--field", "1", "--t-f", "0.1", "--n-outputs", "21", "--out", dir.path().to_str().unwrap()]);
    let (header, rows) = csv_rows(&dir.path().join("twolevel-demo.csv"));
    assert_eq!(header, "s,gamma,h,theta_dot,fidelity");
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| (r[4] - 1.0).abs() < 1e-8));
}

#[test]
fn diagnostics_report_passes() {
    let dir = TempDir::new().unwrap();
    let stdout = run_ok(&["diagnostics", "--spins", "100", "--out", dir.path().to_str().unwrap()]);
    let report = json(&stdout);
    assert_eq!(report["all_passed"], true);
    let checks = report["checks"].as_array().unwrap();
    let exponent = checks.iter().find(|c| c["name"].as_str().unwrap().starts_with("critical exponent")).unwrap();
    assert!(exponent["measured"].as_f64().unwrap() < 0.01);
    assert_eq!(json(&fs::read_to_string(dir.path().join("diagnostics.json")).unwrap()), report);
}
