use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jamgrip"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn jamgrip")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn record_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.trim().strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn default_grasp_succeeds_and_writes_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = run(&["grasp", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!((record_value(&stdout, "F_h_N") - 10.1).abs() < 1e-9);
    let tse = record_value(&stdout, "T_SE_s");
    assert!((tse - 4.3).abs() <= 0.1, "{tse}");
    assert_eq!(fs::read_to_string(dir.path().join("outcome.txt")).unwrap(), stdout);
    let timeline = fs::read_to_string(dir.path().join("timeline.csv")).unwrap();
    assert!(timeline.lines().count() > 1000);
}

#[test]
fn invalid_config_reports_line_and_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[scenario]\npeg_diameter_mm = 40.0\nactivation_force_gf = 0.0\n");
    let out = run(&["grasp", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("activation_force_gf"), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[scenario]\npeg_diamter_mm = 40.0\n");
    let out = run(&["grasp", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn failed_grasp_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[scenario]\ncontact_loss_after_s = 1.0\n");
    let out = run(&["grasp", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("success = false"));
}

#[test]
fn bad_timestep_is_an_error() {
    let dir = TempDir::new().unwrap();
    let out = run(&["grasp", "--dt", "0.003", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nsensor_noise_gf = 2.0\n\n[sweep]\naxis = \"activation_force\"\nvalues = [150.0, 350.0]\nrepetitions = 2\n",
    );
    let mut csvs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let out = run(&["sweep", "--config", &cfg, "--seed", "7", "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(fs::read(out_dir.join("sweep.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().next().unwrap().starts_with("axis_value,rep,success"), "{text}");
}

#[test]
fn sweep_without_section_is_an_error() {
    let dir = TempDir::new().unwrap();
    let out = run(&["sweep", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generate_then_fit_round_trips() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    for (model, coef, exp) in [("air", 102.87, 1.88), ("lumped", 25119.75, 1.29)] {
        let out = run(&["generate", "--model", model, "--out", d]);
        assert_eq!(out.status.code(), Some(0));
        let csv = dir.path().join(format!("samples_{model}.csv"));
        let out = run(&["fit", csv.to_str().unwrap(), "--model", model]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!((record_value(&text, "coefficient") / coef - 1.0).abs() < 1e-6, "{text}");
        assert!((record_value(&text, "exponent") / exp - 1.0).abs() < 1e-6, "{text}");
    }
}

#[test]
fn fit_rejects_empty_and_malformed_csv() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = run(&["fit", empty.to_str().unwrap(), "--model", "lumped"]);
    assert_eq!(out.status.code(), Some(1));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x_m,F_N\n0.001,3.0\n0.002,oops\n").unwrap();
    let out = run(&["fit", bad.to_str().unwrap(), "--model", "lumped"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row"));
}

#[test]
fn serial_replays_golden_transcript() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "serial",
        fixture("golden_transcript.txt").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let got = fs::read(dir.path().join("session.log")).unwrap();
    assert_eq!(got, fs::read(fixture("golden_session.log")).unwrap());
}

#[test]
fn serial_reads_stdin() {
    let mut child = bin()
        .args(["serial", "--tail-ms", "100"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"0 SET FTHR 300\n50 FROB\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let log = String::from_utf8(out.stdout).unwrap();
    assert!(log.contains("OK"), "{log}");
    assert!(log.contains("ERR unknown-command"), "{log}");
}

#[test]
fn serial_rejects_malformed_transcript() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("t.txt");
    fs::write(&path, "0 PING\nlater CLOSE\n").unwrap();
    let out = run(&["serial", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn automaton_trace_reports_all_properties() {
    let out = run(&["automaton-trace"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!out.stdout.is_empty());
}

#[test]
fn help_exits_zero_and_bad_usage_exits_one() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["teleport"]).status.code(), Some(1));
}
