//! End-to-end checks of the command-line binary: exit codes,
//! single-line diagnostics, and the shape of the emitted artifacts.

use std::path::{Path, PathBuf};
use std::process::Command;

fn latlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_latlab"))
}

fn write_cfg(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("exp.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

/// Asserts the diagnostic is a single `latlab: ...` line and returns it.
fn assert_one_line_diag(stderr: &[u8]) -> String {
    let text = String::from_utf8(stderr.to_vec()).unwrap();
    assert_eq!(
        text.lines().count(),
        1,
        "diagnostic must be a single line, got {text:?}"
    );
    assert!(
        text.starts_with("latlab: "),
        "diagnostic must carry the program prefix, got {text:?}"
    );
    text
}

#[test]
fn version_exits_zero() {
    let out = latlab().arg("version").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("latlab "), "got {stdout:?}");
    assert!(out.stderr.is_empty());
}

#[test]
fn explain_covers_every_task_and_rejects_unknown_names() {
    for task in [
        "classify",
        "covolume",
        "gamma",
        "commensurate",
        "serre",
        "spectrum",
        "folner",
        "ergodicity",
        "witnesses",
    ] {
        let out = latlab().args(["explain", task]).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "explain {task} failed");
        assert!(!out.stdout.is_empty(), "explain {task} printed nothing");
        assert!(out.stderr.is_empty());
    }
    let out = latlab().args(["explain", "nosuchtask"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let diag = assert_one_line_diag(&out.stderr);
    assert!(diag.contains("nosuchtask"), "got {diag:?}");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let absent = dir.path().join("absent.cfg");
    let out = latlab()
        .args(["run", absent.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_one_line_diag(&out.stderr);
}

#[test]
fn unknown_section_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "[bogus]\nkey = 1\n");
    let out = latlab()
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let diag = assert_one_line_diag(&out.stderr);
    assert!(diag.contains("bogus"), "got {diag:?}");
}

#[test]
fn mask_length_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "[sequence]\nq = 5 11\ntail = quadratic\n\n[lattices]\ngamma = 111/allin\n",
    );
    let out = latlab()
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_one_line_diag(&out.stderr);
}

#[test]
fn undersized_sequence_value_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "[sequence]\nq = 3\ntail = quadratic\n\n[lattices]\ngamma = 1/allin\n",
    );
    let out = latlab()
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let diag = assert_one_line_diag(&out.stderr);
    assert!(diag.contains("must exceed 4"), "got {diag:?}");
}

#[test]
fn empty_task_list_yields_a_provenance_only_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "[sequence]\nq = 5 11\ntail = quadratic\n\n[lattices]\ngamma = 11/allin\n\n[levels]\nk_max = 1\n",
    );
    let out_dir = tempfile::tempdir().unwrap();
    let out = latlab()
        .args([
            "run",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["tasks"], serde_json::json!({}));
    // The provenance fields are still present even with nothing to run.
    assert_eq!(report["artifact"], serde_json::json!("latlab"));
    assert!(report["config_sha256"].is_string());
    assert!(report["sequence"].is_object());
    assert!(report["lattices"].is_object());
}
