use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn geodesy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geodesy")).args(args).output().unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

/// Values of a CSV column; empty fields are skipped.
fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap())
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().unwrap())
        .collect()
}

#[test]
fn circle_run_conserves_radius() {
    let dir = TempDir::new().unwrap();
    let o = geodesy(&["run", "--problem", "circle", "--method", "mci", "--pt", "2", "--dt", "1", "--tfinal", "100", "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,y_1,y_2\n"));
    assert_eq!(traj.lines().count(), 102);
    let inv = fs::read_to_string(dir.path().join("invariants.csv")).unwrap();
    assert!(inv.starts_with("t,H_error,R_error\n"));
    let r = column(&inv, "R_error");
    assert!(r.iter().all(|e| e.abs() <= 1e-10));
}

#[test]
fn harmonic_euler_single_step() {
    let dir = TempDir::new().unwrap();
    let o = geodesy(&["run", "--problem", "harmonic", "--method", "euler", "--dt", "0.1", "--tfinal", "0.1", "--out", &out_arg(dir.path())]);
    assert!(o.status.success());
    let inv = fs::read_to_string(dir.path().join("invariants.csv")).unwrap();
    let e = column(&inv, "I_error");
    assert_eq!(e.len(), 2);
    assert!((e[1] - 0.01).abs() <= 1e-15);
}

#[test]
fn usage_errors_exit_2() {
    let o = geodesy(&["run", "--problem", "foo"]);
    assert_eq!(o.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&o.stderr);
    for name in ["circle", "lotka-volterra", "pendulum", "kepler", "harmonic"] {
        assert!(msg.contains(name), "{msg}");
    }
    assert_eq!(geodesy(&["run", "--method", "leapfrog"]).status.code(), Some(2));
    assert_eq!(geodesy(&["converge", "--dts", "1,0.5"]).status.code(), Some(2));
    assert_eq!(geodesy(&["tableau", "--pt", "0"]).status.code(), Some(2));
    assert_eq!(geodesy(&["tableau", "--pt", "17"]).status.code(), Some(2));
    assert_eq!(geodesy(&["run", "--dt", "-1"]).status.code(), Some(2));
    assert_eq!(geodesy(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(geodesy(&["run", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn integration_failure_exits_1_with_step() {
    let dir = TempDir::new().unwrap();
    let o = geodesy(&["run", "--problem", "lotka-volterra", "--method", "euler", "--dt", "1", "--tfinal", "10", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("step 0") && msg.contains("positive"), "{msg}");
}

#[test]
fn convergence_slopes() {
    let dir = TempDir::new().unwrap();
    let o = geodesy(&["converge", "--problem", "circle", "--method", "mci", "--pt", "2", "--dts", "1,0.5,0.25,0.125", "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("dt,endpoint_error,invariant_error,observed_order\n"));
    assert_eq!(column(&csv, "dt"), vec![1.0, 0.5, 0.25, 0.125]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let fitted: f64 = stdout.lines().find_map(|l| l.strip_prefix("fitted order ")).unwrap().parse().unwrap();
    assert!((fitted - 4.0).abs() <= 0.25, "{fitted}");

    let dir = TempDir::new().unwrap();
    let o = geodesy(&["converge", "--problem", "circle", "--method", "euler", "--dt", "0.01", "--halvings", "3", "--tfinal", "10", "--out", &out_arg(dir.path())]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    let fitted: f64 = stdout.lines().find_map(|l| l.strip_prefix("fitted order ")).unwrap().parse().unwrap();
    assert!((fitted - 1.0).abs() <= 0.2, "{fitted}");
}

#[test]
fn convergence_without_exact_solution() {
    let dir = TempDir::new().unwrap();
    let o = geodesy(&["converge", "--problem", "pendulum", "--method", "mgi", "--dt", "0.2", "--tfinal", "5", "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let orders = column(&csv, "observed_order");
    assert_eq!(orders.len(), 3);
    assert!(orders.iter().all(|o| (o - 4.0).abs() < 0.5), "{orders:?}");
    assert!(column(&csv, "invariant_error").iter().all(|e| *e <= 1e-11));
}

#[test]
fn tableau_output() {
    let o = geodesy(&["tableau", "--pt", "1"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("5.00000000000000e-1"));
    assert!(text.contains("1.00000000000000e0"));
    let dev: f64 = text.lines().last().unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(dev <= 1e-15);
    let o = geodesy(&["tableau", "--pt", "2"]);
    let text = String::from_utf8_lossy(&o.stdout);
    let dev: f64 = text.lines().last().unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(dev <= 1e-13);
}

#[test]
fn plot_script() {
    let dir = TempDir::new().unwrap();
    let out = out_arg(dir.path());
    let o = geodesy(&["plot", "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trajectory.csv"));

    assert!(geodesy(&["run", "--tfinal", "10", "--out", &out]).status.success());
    assert!(geodesy(&["plot", "--out", &out]).status.success());
    let first = fs::read_to_string(dir.path().join("plot.gp")).unwrap();
    assert!(first.contains("using 2:3"));
    assert!(first.contains("set logscale y"));
    assert!(geodesy(&["plot", "--out", &out]).status.success());
    assert_eq!(fs::read_to_string(dir.path().join("plot.gp")).unwrap(), first);
}

#[test]
fn config_file_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("k");
    fs::write(
        &cfg,
        format!(r#"{{"problem": "kepler", "method": "mgi", "dt": 0.1, "t_final": 5.0, "out": {:?}}}"#, out.to_str().unwrap()),
    )
    .unwrap();
    let o = geodesy(&["run", "--config", cfg.to_str().unwrap(), "--tfinal", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,y_1,y_2,y_3,y_4\n"));
    assert_eq!(traj.lines().count(), 22);
    let h = column(&fs::read_to_string(out.join("invariants.csv")).unwrap(), "H_error");
    assert!(h.iter().all(|e| e.abs() <= 1e-12));

    fs::write(&cfg, r#"{"problem": "kepler", "colour": "red"}"#).unwrap();
    assert_eq!(geodesy(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn runs_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        let o = geodesy(&["run", "--problem", "pendulum", "--method", "mci", "--tfinal", "10", "--samples", "4", "--out", &out_arg(d.path())]);
        assert!(o.status.success());
        let o = geodesy(&["converge", "--problem", "kepler", "--dt", "0.2", "--tfinal", "2", "--out", &out_arg(d.path())]);
        assert!(o.status.success());
    }
    for f in ["trajectory.csv", "invariants.csv", "convergence.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let traj = fs::read_to_string(a.path().join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 2 + 100 * 4);
}

#[test]
fn list_shows_registries() {
    let o = geodesy(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["circle", "lotka-volterra", "pendulum", "kepler", "harmonic", "mci", "mgi", "euler", "seuler", "rk4"] {
        assert!(text.contains(name));
    }
}
