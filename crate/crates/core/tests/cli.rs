use std::path::PathBuf;
use std::process::{Command, Output};

fn cases() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn case(name: &str) -> PathBuf {
    cases().join("cases").join(format!("{name}.json"))
}

fn run(args: &[&str], files: &[PathBuf]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scaffoldlab")).arg("analyze").args(args).args(files).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn golden_reports_are_byte_exact() {
    for name in ["family_a", "family_b"] {
        let out = run(&[], &[case(name)]);
        assert_eq!(out.status.code(), Some(0));
        let golden = std::fs::read_to_string(cases().join("golden").join(format!("{name}.json"))).unwrap();
        assert_eq!(stdout(&out), golden, "{name}");
    }
}

#[test]
fn bad_prime_exits_with_config_error() {
    let out = run(&[], &[case("bad_prime")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`p`"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn ineligible_case_is_reported_not_rejected() {
    let out = run(&[], &[case("ineligible")]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["eligible"], false);
    assert!(report["certificate"].is_null());
    assert!(report.get("gms").is_none());
}

#[test]
fn missing_file_exits_with_one() {
    let out = run(&[], &[cases().join("cases/no_such_case.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn worst_exit_code_wins_and_good_reports_still_print() {
    let out = run(&[], &[case("family_a"), case("bad_prime")]);
    assert_eq!(out.status.code(), Some(1));
    let golden = std::fs::read_to_string(cases().join("golden/family_a.json")).unwrap();
    assert_eq!(stdout(&out), golden);
}

#[test]
fn text_output() {
    let out = run(&["--text"], &[case("family_a")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in ["upper breaks: 1 3", "lower breaks: 1 5", "precision c: 1", "verdict: free", "hopf verdict: unknown"] {
        assert!(text.lines().any(|l| l.starts_with(line)), "missing `{line}` in\n{text}");
    }
    assert!(text.contains("scaffold: valid at c = 1"));
}

#[test]
fn json_and_text_conflict() {
    let out = run(&["--json", "--text"], &[case("family_a")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_directory_receives_one_file_per_case() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("reports");
    let out = run(&["--out", target.to_str().unwrap()], &[case("family_a"), case("family_b")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    for name in ["family_a", "family_b"] {
        let written = std::fs::read_to_string(target.join(format!("{name}.json"))).unwrap();
        let golden = std::fs::read_to_string(cases().join("golden").join(format!("{name}.json"))).unwrap();
        assert_eq!(written, golden);
    }
    let out = run(&["--text", "--out", target.to_str().unwrap()], &[case("family_c")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(target.join("family_c.txt")).unwrap().contains("precision c: 1"));
}

#[test]
fn window_and_precision_overrides() {
    let out = run(&["--window", "-2", "3", "--precision", "80"], &[case("family_a")]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["certificate"]["window"], serde_json::json!([-2, 3]));
    assert_eq!(report["certificate"]["valid"], true);
    assert_eq!(report["config"]["series_precision"], 80);

    let out = run(&["--window", "3", "1"], &[case("family_a")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scaffold_verification_can_be_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("no_scaffold.json");
    std::fs::write(&path, r#"{"p": 2, "n": 2, "beta": ["t^-1", "t^-3"], "verify": {"scaffold": false}}"#).unwrap();
    let out = run(&[], &[path]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["certificate"].is_null());
    assert_eq!(report["gms"]["verdict"], "free");
}
