//! End-to-end runs of the `distill` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn distill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distill"))
        .args(args)
        .output()
        .expect("failed to spawn distill")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(name);
    let mut all = args.to_vec();
    all.extend(["--out", out.to_str().unwrap()]);
    (distill(&all), out)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path);
    let j = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[j].parse().unwrap()).collect()
}

#[test]
fn fig3_writes_csv_and_metadata() {
    let dir = TempDir::new().unwrap();
    let (o, csv) = run_to(dir.path(), "fig3.csv", &["fig3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let (header, rows) = read_csv(&csv);
    assert_eq!(header, ["N", "F_n1", "F_n2", "F_n3", "F_n4", "F_n5"]);
    assert_eq!(rows.len(), 51);
    // Reals carry 15 significant digits in scientific notation.
    let cell = &rows[1][1];
    let mantissa = cell.split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 15, "{cell}");

    let f1 = column(&csv, "F_n1");
    assert!((f1[0] - 0.25).abs() < 1e-15);
    assert!(f1[25] >= 0.99);

    let meta = std::fs::read_to_string(dir.path().join("fig3.csv.meta")).unwrap();
    assert!(meta.contains("experiment = fig3"));
    assert!(meta.contains("seed = 1"));
    assert!(meta.contains("version = "));
}

#[test]
fn fig6_leading_eigenvalue_is_one() {
    let dir = TempDir::new().unwrap();
    let (o, csv) = run_to(dir.path(), "fig6.csv", &["fig6", "--kappa-grid", "0.5:1.5:11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let l0 = column(&csv, "lambda0");
    let l1 = column(&csv, "lambda1");
    assert_eq!(l0.len(), 11);
    assert!(l0.iter().all(|x| (x - 1.0).abs() < 1e-10));
    assert!(l1.iter().all(|x| *x < 1.0));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = ["trajectories", "--n-traj", "200", "--cycles", "10", "--seed", "7"];
    let (a, first) = run_to(dir.path(), "a.csv", &args);
    let (b, second) = run_to(dir.path(), "b.csv", &args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    assert_eq!(std::fs::read(first).unwrap(), std::fs::read(second).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let args = ["trajectories", "--n-traj", "100", "--cycles", "5", "--seed", "3"];
    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    let (a, serial) = run_to(dir.path(), "serial.csv", &one);
    let (b, parallel) = run_to(dir.path(), "parallel.csv", &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(std::fs::read(serial).unwrap(), std::fs::read(parallel).unwrap());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# fig3 settings\ncycles = 10\ng = 0.5  # coupling\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let (o, csv) = run_to(dir.path(), "file.csv", &["fig3", "--config", cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_csv(&csv).1.len(), 11);

    let (o, csv) = run_to(dir.path(), "flag.csv", &["fig3", "--config", cfg, "--cycles", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_csv(&csv).1.len(), 5);
    let meta = std::fs::read_to_string(dir.path().join("flag.csv.meta")).unwrap();
    assert!(meta.contains("cycles = 4"));
    assert!(meta.contains("g = 0.5"));
}

#[test]
fn validate_passes() {
    let dir = TempDir::new().unwrap();
    let (o, csv) = run_to(dir.path(), "validate.csv", &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    let passed = column(&csv, "passed");
    assert!(!passed.is_empty());
    assert!(passed.iter().all(|p| *p == 1.0));
}

#[test]
fn failed_checks_exit_one() {
    // Two trajectories that end identically have zero standard error, so
    // the ensemble check cannot pass.
    let dir = TempDir::new().unwrap();
    let (o, csv) = run_to(dir.path(), "t.csv", &["trajectories", "--n-traj", "2", "--cycles", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("code=E_VALIDATION exit=1"));
    // Results are still written.
    assert!(csv.exists());
}

#[test]
fn usage_errors_exit_two() {
    let o = distill(&["bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("distill-error code=E_UNKNOWN_EXPERIMENT exit=2"));

    let o = distill(&["fig6", "--kappa-grid", "1:0:3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("code=E_INVALID_GRID"));

    let o = distill(&["fig6", "--g", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("code=E_INVALID_VALUE"));

    let o = distill(&["fig3", "--eta", "1.5"]);
    assert_eq!(o.status.code(), Some(2));

    let o = distill(&["fig3", "--no-such-flag", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("code=E_USAGE"));

    let o = distill(&[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn io_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.cfg");
    let o = distill(&["fig3", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("code=E_CONFIG_UNREADABLE"));

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "frobnicate = 3\n").unwrap();
    let o = distill(&["fig3", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("code=E_UNKNOWN_KEY"));

    let unwritable = dir.path().join("no/such/dir/out.csv");
    let o = distill(&["fig3", "--out", unwritable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("code=E_OUTPUT_UNWRITABLE"));
}

#[test]
fn numerical_failures_exit_three() {
    // A vanishing coupling leaves the triplet sector undamped.
    let dir = TempDir::new().unwrap();
    let (o, _) = run_to(dir.path(), "weak.csv", &["fig6", "--g", "1e-9"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("distill-error code=E_NUMERICAL exit=3"));
}

#[test]
fn help_and_version_exit_zero() {
    let o = distill(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("trajectories"));
    assert_eq!(distill(&["--version"]).status.code(), Some(0));
}
