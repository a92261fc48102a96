//! End-to-end tests of the command line binary: output formats, exit codes,
//! determinism, and the table cache.

use serde_json::Value;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_siegel-margin"));
    // Keep tests hermetic even when the caller has a cache directory set.
    cmd.env_remove("SIEGEL_MARGIN_CACHE");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_str(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn parse_json(output: &Output) -> Value {
    serde_json::from_str(&stdout_str(output)).expect("stdout is JSON")
}

#[test]
fn nu_json_has_known_values() {
    let out = run(&[
        "nu",
        "--d",
        "23",
        "--max-a",
        "12",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let doc = parse_json(&out);
    assert_eq!(doc["command"], "nu");
    assert_eq!(doc["summary"]["nu-count-sum"], 19);
    // chi(-23 | 5) = -1, so nu(5) = 0; nu(6) = nu(2) nu(3) = 4.
    let rows = doc["table"]["rows"].as_array().unwrap();
    assert_eq!(rows[4], serde_json::json!([5, -1, 0]));
    assert_eq!(rows[5], serde_json::json!([6, 1, 4]));
    // No timestamp was requested.
    assert!(doc.get("generated_at").is_none());
}

#[test]
fn class_number_of_large_discriminant() {
    let out = run(&[
        "class-number",
        "--d",
        "2383747",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let doc = parse_json(&out);
    assert_eq!(doc["summary"]["class-number"], 98);
    assert_eq!(doc["summary"]["discriminant"], -2383747);
}

#[test]
fn j_integrals_output_is_reproducible() {
    let args = ["j-integrals", "--format", "json", "--no-timestamp"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(stdout_str(&first), stdout_str(&second));
    let doc = parse_json(&first);
    assert_eq!(doc["summary"]["j-log-sum"], 0.354);
    assert_eq!(doc["summary"]["j-const-sum"], 1.067);
    assert_eq!(doc["passed"], true);
}

#[test]
fn timestamp_appears_by_default() {
    let with_ts = run(&["constants-audit"]);
    assert!(with_ts.status.success());
    assert!(stdout_str(&with_ts).contains("generated-at: "));
    let without = run(&["constants-audit", "--no-timestamp"]);
    assert!(!stdout_str(&without).contains("generated-at"));
}

#[test]
fn constants_audit_passes() {
    let out = run(&["constants-audit", "--format", "json", "--no-timestamp"]);
    assert!(out.status.success());
    let doc = parse_json(&out);
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["summary"]["rows"], 20);
}

#[test]
fn dusart_check_rejects_small_x_with_usage_exit() {
    let out = run(&["dusart-check", "--x", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("error:"), "{err}");
}

#[test]
fn dusart_check_passes_at_sweep_end() {
    let out = run(&[
        "dusart-check",
        "--x",
        "2278421",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let doc = parse_json(&out);
    assert_eq!(doc["passed"], true);
    let slack = doc["summary"]["slack"].as_f64().unwrap();
    assert!(slack > 0.0);
}

#[test]
fn lemma_h_rejects_small_discriminant() {
    // 23 is fundamental but far below the asserted range.
    let out = run(&["lemma-h", "--d", "23"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lemma_h_needs_exactly_one_selector() {
    assert_eq!(run(&["lemma-h"]).status.code(), Some(2));
    assert_eq!(
        run(&["lemma-h", "--d", "300000003", "--sample"]).status.code(),
        Some(2)
    );
}

#[test]
fn lemma_h_single_discriminant_passes() {
    let out = run(&[
        "lemma-h",
        "--d",
        "300000003",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let doc = parse_json(&out);
    assert_eq!(doc["summary"]["class-number"], 3072);
    let count = doc["summary"]["nu-count-sum"].as_u64().unwrap();
    assert!(count <= 3072);
    assert_eq!(doc["summary"]["boundary-hit"], false);
}

#[test]
fn case_scan_csv_has_schema_and_corner_rows() {
    let out = run(&[
        "case-scan",
        "--from",
        "44",
        "--to",
        "47",
        "--step",
        "0.5",
        "--format",
        "csv",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# command=case-scan"));
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("has a header row");
    assert_eq!(header, "logd,case,k0,sigma,bound");
    let rows: Vec<&str> = text
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .collect();
    // 7 grid points plus the block-count corner sampled from both sides.
    assert_eq!(rows.len(), 9);
    // Decimal separator is a point; no comma appears inside a cell, so
    // every row splits into exactly five fields.
    for row in &rows {
        assert_eq!(row.split(',').count(), 5, "{row}");
    }
    // The corner pair shares the printed abscissa and jumps k0 from 8 to 9.
    assert!(rows.iter().any(|r| r.starts_with("45.747713917,2,8,")));
    assert!(rows.iter().any(|r| r.starts_with("45.747713917,2,9,")));
}

#[test]
fn case_scan_rejects_bad_ranges() {
    assert_eq!(
        run(&["case-scan", "--from", "10", "--to", "50", "--step", "0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["case-scan", "--from", "50", "--to", "40", "--step", "0.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn prop_verify_reuses_cache_with_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let run_cached = || {
        bin()
            .args(["prop-verify", "--format", "json", "--no-timestamp"])
            .env("SIEGEL_MARGIN_CACHE", dir.path())
            .output()
            .expect("binary runs")
    };
    let first = run_cached();
    assert!(first.status.success(), "{:?}", first);
    let cache_files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(cache_files.len(), 1, "one table cache file is written");
    let second = run_cached();
    assert!(second.status.success());
    assert_eq!(stdout_str(&first), stdout_str(&second));
    let doc = parse_json(&second);
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["summary"]["failures"], 0);
}

#[test]
fn corrupt_cache_is_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("prime_powers_2278421.bin"), b"garbage").unwrap();
    let out = bin()
        .args(["prop-verify", "--format", "json", "--no-timestamp"])
        .env("SIEGEL_MARGIN_CACHE", dir.path())
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(err.contains("warning"), "{err}");
    assert_eq!(parse_json(&out)["passed"], true);
}

#[test]
fn theorem2_accepts_custom_grid_and_rejects_garbage() {
    let out = run(&[
        "theorem2",
        "--h-grid",
        "101,1000",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let doc = parse_json(&out);
    assert_eq!(doc["passed"], true);
    let rows = doc["table"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], 101);
    assert_eq!(rows[0][1], 34);

    assert_eq!(
        run(&["theorem2", "--h-grid", "101,xyz"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["theorem2", "--h-grid", "50"]).status.code(), Some(2));
}

#[test]
fn certify_theorem1_passes_and_inversion_fails() {
    let out = run(&[
        "certify-theorem1",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let doc = parse_json(&out);
    assert_eq!(doc["passed"], true);
    let margin = doc["summary"]["margin"].as_f64().unwrap();
    assert!(margin > 0.03, "{margin}");

    // The same machinery must reject a stronger assumption constant.
    let broken = run(&[
        "certify-theorem1",
        "--assumption",
        "8.0",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert_eq!(broken.status.code(), Some(1));
    let doc = parse_json(&broken);
    assert_eq!(doc["passed"], false);
    let failures = doc["summary"]["failures"].as_u64().unwrap();
    assert!(failures > 0);
}

#[test]
fn dedekind_check_confirms_coefficient_identity() {
    let out = run(&[
        "dedekind-check",
        "--d",
        "15",
        "--max-n",
        "1500",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let doc = parse_json(&out);
    assert_eq!(doc["summary"]["mismatches"], 0);
    assert_eq!(doc["passed"], true);
}

#[test]
fn output_flag_writes_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("audit.json");
    let out = run(&[
        "constants-audit",
        "--format",
        "json",
        "--no-timestamp",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout_str(&out).is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["command"], "constants-audit");
}

#[test]
fn unknown_flags_exit_with_usage_error() {
    assert_eq!(run(&["prop-verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}
