use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nls4(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nls4")).args(args).current_dir(cwd).output().unwrap()
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_then_emit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("wave_operator.toml");
    let out = nls4(&["run", cfg.to_str().unwrap(), "--output-dir", "out"], dir.path());
    assert!(out.status.success(), "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("final_to_first_gap"));
    let report = dir.path().join("out/wave_operator/report.json");
    assert!(report.exists());
    assert!(dir.path().join("out/wave_operator/provenance.json").exists());

    let out = nls4(&["emit", report.to_str().unwrap(), "gaps"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).lines().count() >= 4);

    let out = nls4(&["emit", "out/wave_operator", "nope"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("available"), "{}", stderr(&out));
}

#[test]
fn rerun_gives_identical_body() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("wave_operator.toml");
    let body = || {
        let out = nls4(&["run", cfg.to_str().unwrap(), "--output-dir", "out", "--seed", "7"], dir.path());
        assert!(out.status.success());
        std::fs::read(dir.path().join("out/wave_operator/report.json")).unwrap()
    };
    let first = body();
    assert_eq!(first, body());
}

#[test]
fn unknown_key_exits_with_message() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "experiment = \"decay\"\n[simulation]\nlamda = 1.0\n").unwrap();
    let out = nls4(&["run", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lamda"), "{}", stderr(&out));
    assert!(!dir.path().join("results").exists());
}

#[test]
fn failing_check_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("wave_operator.toml")).unwrap();
    std::fs::write(dir.path().join("strict.toml"), format!("{text}\n[tolerances]\nwave_ratio = 1e-9\n")).unwrap();
    let out = nls4(&["run", "strict.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("fail"));
}

#[test]
fn check_potential_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = nls4(&["check-potential", config("decay.toml").to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}{}", stdout(&out), stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(json.is_object());
}

#[test]
fn missing_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = nls4(&["run", "absent.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:"));
}
