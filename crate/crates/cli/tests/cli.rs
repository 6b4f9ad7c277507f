use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TWO_STATES: &str =
    r#"{"n_qubits":1,"states":[[[1,0],[0,0]],[[0.7071067811865476,0],[0.7071067811865476,0]]]}"#;
const PATTERNS: &str = r#"{"patterns":[[1,-1,1,1],[-1,-1,1,-1],[1,1,1,-1]]}"#;

fn bcqse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcqse")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

/// Data rows of a CSV with `#` comment lines.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn empty_batch_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let b = write(&dir, "empty.json", r#"{"n_qubits":1,"states":[]}"#);
    let o = bcqse(&["bcqse-sweep", "--batch", s(&b), "--t", "1", "--n-list", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bcqse(&["hebbian", "--patterns", s(&write(&dir, "p.json", r#"{"patterns":[]}"#))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_inputs_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"patterns":[[1,0.5]]}"#);
    assert_eq!(bcqse(&["hebbian", "--patterns", s(&bad)]).status.code(), Some(2));
    let o = bcqse(&["verify", "--circuit", s(&write(&dir, "c.txt", "H 0\nFOO 1\n"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let missing = dir.path().join("missing.json");
    assert_eq!(bcqse(&["hebbian", "--patterns", s(&missing)]).status.code(), Some(2));
}

#[test]
fn unreachable_precision_exits_3() {
    let o = bcqse(&["synth", "--tau", "0.7", "--eta", "1e-9"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("precision"));
}

#[test]
fn synth_meets_requested_precision() {
    let o = bcqse(&["synth", "--tau", "0.7", "--eta", "1e-2"]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert!(v["achieved_error"].as_f64().unwrap() <= 1e-2);
}

#[test]
fn decompose_then_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let c = dir.path().join("cps.txt");
    let o = bcqse(&["decompose", "--n", "1", "--theta", "0.37", "--eta", "1e-3", "--circuit", s(&c)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout_json(&o);
    assert_eq!(report["actual_counts"], report["formula_counts_actual_rotations"]);
    assert_eq!(report["qubits"], 4);

    let o = bcqse(&["verify", "--circuit", s(&c), "--theta", "0.37", "--eta", "1e-3"]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["pass"], true);

    let o = bcqse(&["verify", "--circuit", s(&c), "--against", s(&c)]);
    assert!(o.status.success());
    assert!(stdout_json(&o)["against_distance"].as_f64().unwrap() < 1e-12);

    // wrong angle: contract violation
    let o = bcqse(&["verify", "--circuit", s(&c), "--theta", "1.2", "--eta", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["pass"], false);
}

#[test]
fn resources_fixed_regime_example() {
    let o = bcqse(&["resources", "--regime", "fixed", "--t", "1", "--m", "2", "--n-qubits", "1"]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v["n"], 3);
    assert_eq!(v["logical_qubits"], (3 * 2 + 1) * 2);
}

#[test]
fn resources_error_corrected_needs_epsilon() {
    let o = bcqse(&["resources", "--regime", "error-corrected", "--t", "1", "--m", "2", "--n-qubits", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bcqse(&[
        "resources", "--regime", "error-corrected", "--t", "1", "--m", "2", "--n-qubits", "1", "--epsilon", "0.1",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["n"], 20);
}

#[test]
fn sweep_error_falls_with_n_and_embeds_config() {
    let dir = TempDir::new().unwrap();
    let b = write(&dir, "two.json", TWO_STATES);
    let o = bcqse(&["bcqse-sweep", "--batch", s(&b), "--t", "1", "--n-list", "1,2,4,8,16"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# config: {"));
    assert!(text.lines().next().unwrap().contains("\"n_list\":[1,2,4,8,16]"));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header[..2], ["n".to_string(), "choi_distance".to_string()]);
    let errs: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    let ratio = errs[3] / errs[4];
    assert!((1.7..2.3).contains(&ratio), "{ratio}");
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let b = write(&dir, "two.json", TWO_STATES);
    let out = dir.path().join("out");
    let run = || {
        let o = bcqse(&[
            "--seed", "7", "-o", s(&out), "phase-estimate", "--batch", s(&b), "--input", "[[0.6,0],[0,0.8]]",
            "--bits", "3", "--shots", "64",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(&out).unwrap()
    };
    assert_eq!(run(), run());
    let sweep = || {
        let o = bcqse(&["-o", s(&out), "bcqse-sweep", "--batch", s(&b), "--t", "0.5", "--n-list", "1,3,9"]);
        assert!(o.status.success());
        fs::read(&out).unwrap()
    };
    assert_eq!(sweep(), sweep());
}

#[test]
fn hebbian_writes_weights_and_batch() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pats.json", PATTERNS);
    let batch = dir.path().join("enc.json");
    let o = bcqse(&["hebbian", "--patterns", s(&p), "--batch-out", s(&batch)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let (header, rows) = csv_rows(&text);
    assert_eq!(header.len(), 5);
    assert_eq!(rows.len(), 4);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[1 + i], 0.0);
        for j in 0..4 {
            assert_eq!(r[1 + j], rows[j][1 + i]);
        }
    }
    // W[0][1] = sum of x0 x1 over the three patterns / (M d)
    assert!((rows[0][2] - (-1.0 + 1.0 + 1.0) / 12.0).abs() < 1e-12);

    let o = bcqse(&["bcqse-sweep", "--batch", s(&batch), "--t", "1", "--n-list", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn phase_estimate_finds_largest_eigenvalue() {
    let dir = TempDir::new().unwrap();
    let b = write(&dir, "two.json", TWO_STATES);
    let o = bcqse(&["phase-estimate", "--batch", s(&b), "--input", "eig:0", "--bits", "4", "--channel", "exact"]);
    assert!(o.status.success());
    let est = stdout_json(&o)["estimate"].as_f64().unwrap();
    let lambda = 0.5 + 0.125f64.sqrt();
    assert!((est - lambda).abs() <= 1.0 / 16.0, "{est}");
}
