use std::fs;
use std::process::Command;

use mnl_core::harness::{read_results, MetricsRow, OutputFormat};

fn harness() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mnl-harness"))
}

const SMALL: [&str; 10] = ["--gamma", "4,2,2", "--horizons", "300,150", "--alphas", "0,0.5", "--instances", "2", "--runs", "2"];

#[test]
fn csv_sweep_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let status = harness().args(SMALL).arg("--out").arg(&out).args(["--seed", "3"]).status().unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), MetricsRow::HEADER.join(","));
    let rows = read_results(&out, OutputFormat::Csv).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 5);
    // horizons are sorted regardless of flag order
    assert_eq!(rows[0].horizon, 150);
    assert_eq!(rows.iter().filter(|r| r.aggregate).count(), 4);
}

#[test]
fn json_to_stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.json");
    let a = harness().args(SMALL).args(["--format", "json", "--parallel", "2"]).output().unwrap();
    assert!(a.status.success());
    let b = harness().args(SMALL).args(["--format", "json", "--out"]).arg(&out).status().unwrap();
    assert!(b.success());
    let from_stdout: Vec<MetricsRow> = mnl_core::harness::parse_results(a.stdout.as_slice(), OutputFormat::Json).unwrap();
    let from_file = read_results(&out, OutputFormat::Json).unwrap();
    assert_eq!(from_stdout.len(), from_file.len());
    assert!(from_stdout.iter().zip(&from_file).all(|(x, y)| x.same_outcome(y)));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    let out = dir.path().join("rows.csv");
    fs::write(
        &cfg,
        format!(
            "gamma = [\"3,1,2\"]\nhorizons = [200]\nalphas = [0.5]\ninstances = 1\nruns = 3\nseed = 1\nformat = \"csv\"\nout = {:?}\n",
            out
        ),
    )
    .unwrap();
    let status = harness().arg("--config").arg(&cfg).args(["--runs", "1"]).status().unwrap();
    assert!(status.success());
    let rows = read_results(&out, OutputFormat::Csv).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].gamma, "(3,1,2)");
}

#[test]
fn failed_cells_exit_nonzero() {
    // T = 3 is shorter than the warm start of 4 products
    let out = harness().args(["--gamma", "4,2,2", "--horizons", "3", "--instances", "1", "--runs", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let rows = mnl_core::harness::parse_results(out.stdout.as_slice(), OutputFormat::Csv).unwrap();
    assert!(rows.iter().all(MetricsRow::failed));
}

#[test]
fn bad_arguments_rejected() {
    assert!(!harness().args(["--gamma", "4,2"]).status().unwrap().success());
    assert!(!harness().args(["--format", "xml"]).status().unwrap().success());
    assert!(!harness().args(["--alphas", "2"]).status().unwrap().success());
}
