use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tm-ode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn simulate_writes_one_csv_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--preset", "fig1", "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let tm = fs::read_to_string(dir.path().join("tm_discrete.csv")).unwrap();
    assert!(tm.starts_with("k,t,f_error,grad_norm,x_0"));
    let ode = fs::read_to_string(dir.path().join("tm_ode.csv")).unwrap();
    assert!(ode.starts_with("t,f_error,grad_norm,V,Y_0,X_0"));
    assert!(dir.path().join("combined.csv").exists());
}

#[test]
fn iqc_output_is_deterministic() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let cfg = cfg_dir.path().join("small.cfg");
    fs::write(&cfg, "iqc_m = 1\niqc_kappa = 2, 50\n").unwrap();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&["iqc", "--config", cfg.to_str().unwrap(), "--seed", "3", "--out", &out_arg(dir.path())]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(dir.path().join("iqc_sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert!(text.contains(",certified"));
    assert!(text.contains("infeasible_search"));
}

#[test]
fn rates_writes_the_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["rates", "--out", &out_arg(dir.path())]);
    assert!(o.status.success());
    for name in ["mu_bounds.csv", "rate_sweep.csv", "alpha_sweep.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn certify_passes_at_the_certified_rate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["certify", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = fs::read_to_string(dir.path().join("certify_report.txt")).unwrap();
    assert!(report.contains("overall: pass"));
}

#[test]
fn certify_fails_well_above_the_certified_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fast.cfg");
    fs::write(&cfg, "rate_multiplier = 5\n").unwrap();
    let o = run(&["certify", "--config", cfg.to_str().unwrap(), "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    let report = fs::read_to_string(dir.path().join("certify_report.txt")).unwrap();
    assert!(report.contains("overall: FAIL"));
}

#[test]
fn zero_horizon_keeps_the_initial_sample() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--t-end", "0", "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ode = fs::read_to_string(dir.path().join("tm_ode.csv")).unwrap();
    assert_eq!(ode.lines().count(), 2);
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "iterations = many\n").unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("iterations"));
}

#[test]
fn scale_outside_range_is_rejected() {
    let o = run(&["simulate", "--scale", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scale"));
}
