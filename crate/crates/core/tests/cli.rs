use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn frmv(args: &[&str]) -> Output {
    frmv_env(args, &[])
}

fn frmv_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_frmv"));
    cmd.args(args).env_remove("FRMV_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const FIVE_ROWS: &str = "1,2,3\n2,4,1\n3,3,3\n5,1,2\n4,2,6\n";

fn outputs(prefix: &Path) -> Vec<PathBuf> {
    [".vectors.csv", ".noisedropped.csv", ".rois.json", ".report.json"]
        .iter()
        .map(|sfx| PathBuf::from(format!("{}{sfx}", prefix.display())))
        .collect()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&frmv(&["--help"])), 0);
    assert_eq!(code(&frmv(&["--version"])), 0);
    assert_eq!(code(&frmv(&[])), 2);
    assert_eq!(code(&frmv(&["detect", "--bogus"])), 2);
    assert_eq!(code(&frmv(&["detect", "--input", "x.csv"])), 2);
}

#[test]
fn detect_small_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", FIVE_ROWS);
    let prefix = dir.path().join("run");
    let o = frmv(&["detect", "--input", s(&input), "--window", "3", "--out-prefix", s(&prefix)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for p in outputs(&prefix) {
        assert!(p.exists(), "{}", p.display());
    }
    let vectors = std::fs::read_to_string(&outputs(&prefix)[0]).unwrap();
    assert_eq!(vectors.lines().count(), 6);
}

#[test]
fn window_two_is_a_config_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", FIVE_ROWS);
    let prefix = dir.path().join("run");
    let o = frmv(&["detect", "--input", s(&input), "--window", "2", "--out-prefix", s(&prefix)]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("wndw >= 3"), "{}", stderr(&o));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn parse_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "1,2\n3,NaN\n5,6\n");
    let prefix = dir.path().join("run");
    let o = frmv(&["detect", "--input", s(&bad), "--window", "3", "--out-prefix", s(&prefix)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
    let ragged = write(dir.path(), "ragged.csv", "1,2\n3\n5,6\n");
    assert_eq!(code(&frmv(&["detect", "--input", s(&ragged), "--window", "3", "--out-prefix", s(&prefix)])), 3);
    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&frmv(&["detect", "--input", s(&missing), "--out-prefix", s(&prefix)])), 1);
    assert!(!outputs(&prefix)[0].exists());
}

#[test]
fn detect_is_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("syn.csv");
    let o = frmv(&["synth", "--rows", "120", "--cols", "10", "--peaks", "60:3:30", "--seed", "4", "--out", s(&data)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut runs = Vec::new();
    for (i, threads) in ["1", "1", "4"].iter().enumerate() {
        let prefix = dir.path().join(format!("r{i}"));
        let plot = dir.path().join(format!("r{i}.svg"));
        let o = frmv_env(
            &["detect", "--input", s(&data), "--out-prefix", s(&prefix), "--plot", s(&plot), "--plot-pv"],
            &[("FRMV_THREADS", threads)],
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let mut bytes: Vec<Vec<u8>> = outputs(&prefix).iter().map(|p| std::fs::read(p).unwrap()).collect();
        bytes.push(std::fs::read(&plot).unwrap());
        runs.push(bytes);
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn bad_thread_setting() {
    let o = frmv_env(&["synth", "--out", "unused.csv"], &[("FRMV_THREADS", "0")]);
    assert_eq!(code(&o), 2);
    let o = frmv_env(&["synth", "--out", "unused.csv"], &[("FRMV_THREADS", "many")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn synth_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = frmv(&["synth", "--rows", "300", "--cols", "40", "--peaks", "100:3:50", "--seed", "7", "--out", s(p)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let truth: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.truth.json")).unwrap()).unwrap();
    let peaks = truth["peaks"].as_array().unwrap();
    assert_eq!(peaks.len(), 1);
    assert_eq!(peaks[0]["apex"], 100);

    let noise = dir.path().join("noise.csv");
    assert_eq!(code(&frmv(&["synth", "--rows", "20", "--cols", "3", "--out", s(&noise)])), 0);
    let truth = std::fs::read_to_string(dir.path().join("noise.truth.json")).unwrap();
    assert!(truth.contains("\"peaks\": []"));

    assert_eq!(code(&frmv(&["synth", "--peaks", "100:3", "--out", s(&noise)])), 2);
    assert_eq!(code(&frmv(&["synth", "--peaks", "x:3:5", "--out", s(&noise)])), 2);
}

#[test]
fn sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("sw");
    let o = frmv(&["sweep", "--amplitudes", "0", "--seeds", "5", "--out-prefix", s(&prefix)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("sw.sweep.csv")).unwrap();
    assert!(csv.starts_with("amplitude,seed,peak_id,detected"));
    assert_eq!(csv.lines().count(), 6);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sw.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["wndw"], 10);
    assert_eq!(summary["config"]["cutoff"], 0.7);

    let o = frmv(&["sweep", "--amplitudes", "0,50", "--seeds", "20", "--out-prefix", s(&prefix)]);
    assert_eq!(code(&o), 0);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sw.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["amplitudes"][1]["detection_rate"], 1.0);

    assert_eq!(code(&frmv(&["sweep", "--amplitudes", "5", "--window", "2", "--out-prefix", s(&prefix)])), 4);
}

#[test]
fn match_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let library = write(dir.path(), "lib.csv", "label,41,43,57\nhexane,1,2,3\nnonane,3,2,1\nother,0,1,0\n");
    let query = write(dir.path(), "q.csv", "label,41,43,57\nunknown,2,4,6\n");
    let out = dir.path().join("m.json");
    let o = frmv(&["match", "--query", s(&query), "--library", s(&library), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let hits = v[0]["hits"].as_array().unwrap();
    assert_eq!(hits[0]["label"], "hexane");
    assert!((hits[0]["score"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    assert!((hits[1]["score"].as_f64().unwrap() - 100.0 * 10.0 / 14.0).abs() < 1e-9);

    let empty = write(dir.path(), "empty.csv", "label,41,43,57\n");
    let o = frmv(&["match", "--query", s(&query), "--library", s(&empty), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v[0]["hits"].as_array().unwrap().is_empty());

    let zero = write(dir.path(), "zero.csv", "label,41,43,57\nblank,0,0,0\n");
    assert_eq!(code(&frmv(&["match", "--query", s(&zero), "--library", s(&library), "--out", s(&out)])), 4);
}

#[test]
fn extract_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("syn.csv");
    assert_eq!(code(&frmv(&["synth", "--rows", "60", "--cols", "8", "--peaks", "30:3:80", "--out", s(&data)])), 0);
    let out = dir.path().join("spec.csv");
    let o = frmv(&["extract", "--roi", s(&data), "--start", "22", "--end", "38", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("label,1,2,3,4,5,6,7,8\nrank1,"));

    let profile: String = (22..=38)
        .map(|i: i32| format!("{:.6}\n", (-0.5 * (f64::from(i - 30) / 3.0).powi(2)).exp()))
        .collect();
    let profiles = write(dir.path(), "b.csv", &profile);
    let o = frmv(&["extract", "--roi", s(&data), "--start", "22", "--end", "38", "--profiles", s(&profiles), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(std::fs::read_to_string(&out).unwrap().contains("component_1,"));

    assert_eq!(code(&frmv(&["extract", "--roi", s(&data), "--start", "40", "--end", "30", "--out", s(&out)])), 4);
}
