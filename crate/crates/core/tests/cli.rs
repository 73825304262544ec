use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn channel(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "channels", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn qtraj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtraj")).args(args).env("QTRAJ_THREADS", "1").output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn stochastic_commands_require_a_seed() {
    let ch = channel("depolarizing-d2.json");
    let out = qtraj(&["simulate", &ch, "--x0", "1,0", "-n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
    let rho = channel("rho0.json");
    assert_eq!(qtraj(&["gap-sample", &rho, "-n", "5"]).status.code(), Some(2));
}

#[test]
fn module_errors_are_json_with_nonzero_exit() {
    let out = qtraj(&["analyze", "/nonexistent/channel.json"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert_eq!(err["error"]["kind"], "Io");

    let out = qtraj(&["solve-density", &channel("swap.json"), "--grid", "8x4"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "InvalidChannel");

    let out = qtraj(&["simulate", &channel("depolarizing-d2.json"), "--x0", "1,0,0", "-n", "3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_commands_reject_csv() {
    let out = qtraj(&["--format", "csv", "analyze", &channel("swap.json")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn replay_is_byte_identical() {
    let ch = channel("depolarizing-d3.json");
    let args = ["simulate", &ch, "--x0", "1,1i,0", "-n", "200", "--burn-in", "10", "--thin", "3", "--seed", "42"];
    let a = qtraj(&args);
    let b = qtraj(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = qtraj(&["simulate", &ch, "--x0", "1,1i,0", "-n", "200", "--burn-in", "10", "--thin", "3", "--seed", "43"]);
    assert_ne!(a.stdout, c.stdout);

    let json = ["--format", "json", "simulate", &ch, "--x0", "1,0,0", "-n", "20", "--seed", "9"];
    assert_eq!(qtraj(&json).stdout, qtraj(&json).stdout);
}

#[test]
fn simulate_csv_layout() {
    let ch = channel("counterexample.json");
    let out = qtraj(&["simulate", &ch, "--x0", "1,0", "-n", "4", "--burn-in", "0", "--thin", "1", "--seed", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let config: Value = serde_json::from_str(lines[0].strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(config["command"], "simulate");
    assert_eq!(config["args"]["seed"], 1);
    assert_eq!(lines[1], "step,outcome,re0,im0,re1,im1");
    assert_eq!(lines.len(), 2 + 4);
    // Step 0 is the initial state, without an outcome.
    assert!(lines[2].starts_with("0,,"));
    for (t, line) in lines[3..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], (t + 1).to_string());
        let j: usize = fields[1].parse().unwrap();
        assert!((1..=2).contains(&j));
    }
}

#[test]
fn analyze_reports_period_of_swap() {
    let v = stdout_json(&qtraj(&["analyze", &channel("swap.json")]));
    assert_eq!(v["report"]["irreducible"], true);
    assert_eq!(v["report"]["period"], 2);
    assert_eq!(v["report"]["primitive"], false);
    assert_eq!(v["config"]["command"], "analyze");
    assert_eq!(v["config"]["channel"]["name"], "swap");
}

#[test]
fn gap_density_at_basis_vector() {
    let v = stdout_json(&qtraj(&["gap-density", &channel("rho0.json"), "--state", "1,0"]));
    let d = v["density"].as_f64().unwrap();
    assert!((d - 8.0 / 3.0).abs() <= 1e-12, "{d}");
}

#[test]
fn gap_sample_then_compare_to_itself() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("g.csv");
    let m = m.to_str().unwrap();
    let out = qtraj(&["gap-sample", &channel("rho0.json"), "-n", "300", "--seed", "4", "--out", m]);
    assert!(out.status.success());
    let v = stdout_json(&qtraj(&["compare", m, m, "--seed", "1", "--subsample", "300", "--replicas", "5"]));
    assert_eq!(v["comparison"]["statistic"].as_f64().unwrap(), 0.0);
    assert_eq!(v["comparison"]["below_upper"], true);
    assert_eq!(v["sizes"][0], 300);
}

#[test]
fn solve_density_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let v = stdout_json(&qtraj(&[
        "solve-density",
        &channel("perturbed-depolarizing.json"),
        "--grid",
        "20x10",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!(v["residual"].as_f64().unwrap() <= 1e-9);
    assert!((v["integral"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "theta_band,phi_sector,cos_theta,phi,density");
    assert_eq!(rows.len(), 1 + 200);
    let total: f64 =
        rows[1..].iter().map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum::<f64>() / 200.0;
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn estimate_invariant_measure_file_loads() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let v = stdout_json(&qtraj(&[
        "estimate-invariant",
        &channel("swap.json"),
        "--x0",
        "1,0",
        "-n",
        "100",
        "--burn-in",
        "0",
        "--thin",
        "1",
        "--chains",
        "2",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(v["period"], 2);
    let m = qtraj::io::load_measure(&out).unwrap();
    assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // Deterministic swap orbit {e1, e2}: the Cesàro mean is the maximally mixed state.
    let rho = &v["mean_density_matrix"];
    assert!((rho[0][0][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn certify_example_one_at_printed_point() {
    let point = "1,2,3,1,2,3,1,2,3,1,2,3,1,2,3,1";
    let v = stdout_json(&qtraj(&["certify-mprim", &channel("example1-3d.json"), "--p", "8", "--point", point]));
    assert_eq!(v["certificate"]["certified"], true);
    assert_eq!(v["nvars"], 16);
}

#[test]
fn certify_random_points_need_seed() {
    let out = qtraj(&["certify-mprim", &channel("example1-3d.json"), "--p", "8"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn examples_emit_verdicts() {
    let v = stdout_json(&qtraj(&["examples", "example1-3d"]));
    assert_eq!(v["verdict"]["passed"], true);
    let out = qtraj(&["examples", "no-such-example"]);
    assert_eq!(out.status.code(), Some(3));
}
