//! Byte-for-byte comparison of CLI output against files in `tests/golden`.
//! Set `MCX_BLESS=1` to rewrite them.

use std::path::PathBuf;
use std::process::Command;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn mcx(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mcx"))
        .current_dir(golden_dir())
        .args(args)
        .output()
        .expect("run mcx");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

fn compare(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("MCX_BLESS").is_some() {
        std::fs::write(&path, actual).expect("write golden");
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from golden output\n--- expected\n{expected}\n--- actual\n{actual}");
}

#[test]
fn check_seed_7() {
    let (code, out, _) = mcx(&["check", "--seed", "7", "--cases", "500"]);
    assert_eq!(code, 0);
    compare("check_seed7_cases500.txt", &out);
}

#[test]
fn bound_rademacher10() {
    let (code, out, _) = mcx(&["bound", "--config", "rademacher10.json", "--t-grid", "0:10:1"]);
    assert_eq!(code, 0);
    compare("bound_rademacher10.json", &out);
}

#[test]
fn report_rademacher10() {
    let (code, out, _) = mcx(&["report", "--config", "rademacher10.json"]);
    assert_eq!(code, 0);
    compare("report_rademacher10.txt", &out);
}

#[test]
fn simulate_empty() {
    let dir = std::env::temp_dir().join(format!("mcx-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("tail.csv");
    let (code, out, _) = mcx(&[
        "simulate",
        "--config",
        "empty.json",
        "--samples",
        "1000",
        "--seed",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    compare("simulate_empty.csv", &std::fs::read_to_string(&csv).unwrap());
    compare("simulate_empty.stdout", &out);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn simulate_to_stdout_puts_summary_on_stderr() {
    let (code, out, err) = mcx(&["simulate", "--config", "empty.json"]);
    assert_eq!(code, 0);
    compare("simulate_empty.csv", &out);
    compare("simulate_empty.stdout", &err);
}

#[test]
fn invalid_spec_reports_pointer() {
    let dir = std::env::temp_dir().join(format!("mcx-invalid-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"family": "rademacher_series", "coefficients": [[[1, 2], [3, 4]]]}"#).unwrap();
    let (code, out, err) = mcx(&["bound", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(out.is_empty());
    compare("invalid_spec.stderr", &err);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(mcx(&["bound"]).0, 1);
    assert_eq!(mcx(&["simulate", "--config", "empty.json", "--t-grid", "3:1:1"]).0, 1);
    assert_eq!(mcx(&["simulate", "--config", "missing.json"]).0, 1);
    assert_eq!(mcx(&["--help"]).0, 0);
}
