use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use inexa_core::fixtures;
use inexa_core::ocel::{parse_log, LogFormat};

fn inexa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inexa")).args(args).output().unwrap()
}

fn fixture(dir: &Path, name: &str, src: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, src).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn history_len(path: &Path) -> usize {
    parse_log(&std::fs::read(path).unwrap(), LogFormat::OcelJson).unwrap().history().applied.len()
}

#[test]
fn discover_writes_dot_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let log = fixture(dir.path(), "log.json", fixtures::BANK);
    let dot = dir.path().join("net.dot");
    let out = inexa(&["discover", s(&log), "-o", s(&dot)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("click open account"));
    let json = dir.path().join("net.json");
    assert!(inexa(&["discover", s(&log), "-o", s(&json), "--format", "json"]).status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(v["metrics"]["elements"], 36);
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let missing = inexa(&["discover", "/nonexistent/log.json", "-o", s(&out)]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());
    assert_eq!(inexa(&["discover"]).status.code(), Some(1));
    assert_eq!(inexa(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(inexa(&["--help"]).status.code(), Some(0));
    let empty = fixture(dir.path(), "empty.json", r#"{"objects": {}, "events": []}"#);
    assert_eq!(inexa(&["discover", s(&empty), "-o", s(&out)]).status.code(), Some(3));
    let log = fixture(dir.path(), "log.json", fixtures::BANK);
    let script = fixture(dir.path(), "bad.txt", "apply seq t5,t7 workflow:bank\n");
    let r = inexa(&["apply-script", s(&log), s(&script), "--log-out", s(&out)]);
    assert_eq!(r.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&r.stderr).contains("step 1"));
}

#[test]
fn init_threshold_extremes() {
    let dir = tempfile::tempdir().unwrap();
    let log = fixture(dir.path(), "log.json", fixtures::BANK);
    let (model, out) = (dir.path().join("m.dot"), dir.path().join("l.json"));
    let r = inexa(&["init", s(&log), "--threshold", "0", "--model-out", s(&model), "--log-out", s(&out)]);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("warning"));
    assert!(history_len(&out) > 1);

    let huge = u64::MAX.to_string();
    inexa(&["init", s(&log), "--threshold", &huge, "--model-out", s(&model), "--log-out", s(&out)]);
    let disc = dir.path().join("d.dot");
    inexa(&["discover", s(&log), "-o", s(&disc)]);
    assert_eq!(std::fs::read(&model).unwrap(), std::fs::read(&disc).unwrap());
    assert_eq!(history_len(&out), 0);
}

#[test]
fn init_is_deterministic_under_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let log = fixture(dir.path(), "log.json", fixtures::BANK);
    let run = |tag: &str| {
        let out = dir.path().join(format!("{tag}.json"));
        let model = dir.path().join(format!("{tag}.dot"));
        let r = inexa(&["init", s(&log), "--threshold", "0", "--seed", "11", "--model-out", s(&model), "--log-out", s(&out)]);
        assert!(r.status.success());
        (std::fs::read(out).unwrap(), std::fs::read(model).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn scripts_extend_and_retract_the_history() {
    let dir = tempfile::tempdir().unwrap();
    let aug = fixture(dir.path(), "aug.json", fixtures::BANK_AUGMENTED);
    let out = dir.path().join("out.json");
    let one = fixture(dir.path(), "one.txt", "# fine-grained bank steps\napply seq t5,t6,t7,t8 workflow:bank\n");
    assert!(inexa(&["apply-script", s(&aug), s(&one), "--log-out", s(&out)]).status.success());
    assert_eq!(history_len(&out), 3);

    let empty = fixture(dir.path(), "empty.txt", "");
    assert!(inexa(&["apply-script", s(&aug), s(&empty), "--log-out", s(&out)]).status.success());
    let input = parse_log(fixtures::BANK_AUGMENTED.as_bytes(), LogFormat::OcelJson).unwrap();
    assert_eq!(parse_log(&std::fs::read(&out).unwrap(), LogFormat::OcelJson).unwrap(), input);

    let plain = fixture(dir.path(), "plain.json", fixtures::BANK);
    let both = fixture(
        dir.path(),
        "both.txt",
        "apply cla t9,t10,t11,t12 workflow:lc:finalize account opening\napply seq t5,t6,t7,t8 workflow:bank\nredo last\nredo last\n",
    );
    assert!(inexa(&["apply-script", s(&plain), s(&both), "--log-out", s(&out)]).status.success());
    let original = parse_log(fixtures::BANK.as_bytes(), LogFormat::OcelJson).unwrap();
    assert_eq!(parse_log(&std::fs::read(&out).unwrap(), LogFormat::OcelJson).unwrap(), original);
}

#[test]
fn export_rebuilds_the_recorded_model() {
    let dir = tempfile::tempdir().unwrap();
    let aug = fixture(dir.path(), "aug.json", fixtures::BANK_AUGMENTED);
    let (out, model) = (dir.path().join("out.json"), dir.path().join("m.json"));
    let r = inexa(&["export", s(&aug), "-o", s(&out), "--model-out", s(&model), "--format", "json"]);
    assert!(r.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&model).unwrap()).unwrap();
    assert_eq!(v["metrics"]["elements"], 21);
    assert_eq!(history_len(&out), 2);
}

#[test]
fn demo_runs_the_bank_example() {
    let dir = tempfile::tempdir().unwrap();
    let r = inexa(&["demo", "--out-dir", s(dir.path())]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8_lossy(&r.stdout);
    assert!(text.contains("→(?click open account, ..., ?retrieve acceptance signature)"));
    assert!(text.contains("↔ client"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 4);
}
