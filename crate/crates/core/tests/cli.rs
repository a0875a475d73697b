use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tables() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tables")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circuitforge")).args(args).output().unwrap()
}

fn circuit(name: &str) -> String {
    tables().join(name).to_string_lossy().into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn spectrum_reports_the_split_junction_transition() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--circuit", &circuit("circuit1.json"), "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out.path().join("spectrum.json"));
    let levels = doc["result"]["levels"].as_array().unwrap();
    let w10 = levels[1].as_f64().unwrap() - levels[0].as_f64().unwrap();
    assert!((w10 / 1e9 - 4.9155).abs() < 1e-3, "{w10}");
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.matches("omega_10").count(), 1);
    assert!(out.path().join("spectrum.txt").exists());
    assert!(out.path().join("spectrum_elements.csv").exists());
}

#[test]
fn config_is_echoed_with_defaults() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["quantize", "--circuit", &circuit("circuit4.json"), "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success());
    let doc = read_json(&out.path().join("quantize.json"));
    assert_eq!(doc["command"], "quantize");
    assert_eq!(doc["config"]["command"]["quantize"]["input"]["operator"], "charge-edge-left");
    assert_eq!(doc["config"]["no_plots"], false);
    assert!(doc["truncation"]["charge"].is_u64());
}

#[test]
fn invalid_circuit_exits_with_one() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--circuit", &circuit("invalid_all_caps.json"), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("OnlyCapacitive"));
}

#[test]
fn missing_file_exits_with_one() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--circuit", "/nonexistent.json", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["spectrum"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["optimize", "--target", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_writes_a_seven_column_table() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep",
        "--circuit",
        &circuit("circuit4.json"),
        "--flux-min",
        "-1",
        "--flux-max",
        "1",
        "--flux-steps",
        "5",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.path().join("sweep.dat")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.split_whitespace().count() == 7));
}

#[test]
fn no_plots_suppresses_plot_files() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep",
        "--circuit",
        &circuit("circuit4.json"),
        "--flux-steps",
        "3",
        "--no-plots",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(out.path().join("sweep.json").exists());
    assert!(!out.path().join("sweep.dat").exists());
}

#[test]
fn optimize_is_reproducible_byte_for_byte() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().to_str().unwrap();
    let args = ["optimize", "--target", "ladder", "--epochs", "3", "--seed", "5", "--out", dir];
    let read = |name: &str| std::fs::read(out.path().join(name)).unwrap();
    assert!(run(&args).status.success());
    let first = (read("optimize.json"), read("optimize_history.dat"));
    assert!(run(&args).status.success());
    assert_eq!(first, (read("optimize.json"), read("optimize_history.dat")));
}

#[test]
fn dynamics_and_robustness_write_their_tables() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().to_str().unwrap();
    let c = circuit("circuit1.json");
    assert!(run(&["dynamics", "--circuit", &c, "--samples", "11", "--out", dir]).status.success());
    let dat = std::fs::read_to_string(out.path().join("dynamics.dat")).unwrap();
    assert_eq!(dat.lines().filter(|l| !l.starts_with('#')).count(), 11);
    let o = run(&["robustness", "--circuit", &c, "--target", "ladder", "--samples", "3", "--out", dir]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.path().join("robustness_summary.dat").exists());
    let o = run(&["convergence", "--circuit", &c, "--m-max", "6", "--out", dir]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.path().join("convergence.dat").exists());
}
