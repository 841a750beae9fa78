//! Tables, CSV writing and the metadata sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    /// Integers verbatim, reals in scientific notation with 15 significant
    /// digits. Rust formatting ignores the process locale.
    pub fn render(&self) -> String {
        match *self {
            Cell::Text(ref t) => t.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) if x.is_nan() => "nan".into(),
            Cell::Real(x) if x.is_infinite() => if x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Real(x) => format!("{x:.14e}"),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Cell::Int(i) => i as f64,
            Cell::Real(x) => x,
            Cell::Text(_) => f64::NAN,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<&str> for Cell {
    fn from(t: &str) -> Self {
        Cell::Text(t.to_string())
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u32> for Cell {
    fn from(i: u32) -> Self {
        Cell::Int(i as i64)
    }
}

/// A named sanity check attached to an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= tolerance,
            value,
            tolerance,
            detail: format!("{value:.3e} <= {tolerance:e}"),
        }
    }

    /// Passes when `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= bound,
            value,
            tolerance: bound,
            detail: format!("{value:.6} >= {bound}"),
        }
    }

    pub fn holds(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            tolerance: 1.0,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub checks: Vec<Check>,
    /// Free-form lines for the summary and the metadata sidecar.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64()).collect())
    }

    pub fn failed_checks(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        let io = |e: csv::Error| CliError::Output {
            path: path.to_path_buf(),
            source: e.into(),
        };
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.flush().map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Column ranges and check results for standard output.
    pub fn summary(&self, experiment: &str) -> String {
        let mut s = format!("{experiment}: {} rows\n", self.rows.len());
        for (j, name) in self.columns.iter().enumerate() {
            let vals = self.rows.iter().map(|r| r[j].as_f64()).filter(|x| x.is_finite());
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            let _ = writeln!(s, "  {name:<28} min {lo:>+.6e}  max {hi:>+.6e}");
        }
        for note in &self.notes {
            let _ = writeln!(s, "  note: {note}");
        }
        for c in &self.checks {
            let _ = writeln!(s, "  {}", c.line());
        }
        s
    }
}

pub fn metadata_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn git_revision() -> String {
    std::process::Command::new("git")
        .args(["rev-parse", "--short=12", "HEAD"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

/// `key = value` text describing a run: version, parameters, tolerances and
/// check outcomes.
pub fn metadata(config: &ExperimentConfig, table: &Table) -> String {
    use distill_core::channels as ch;
    let mut s = String::new();
    let _ = writeln!(s, "# distill run metadata");
    let _ = writeln!(s, "experiment = {}", config.experiment);
    let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "git_revision = {}", git_revision());
    let _ = writeln!(s, "units = kappa, chi, delta_kappa and g in units of pi");
    let _ = writeln!(s, "columns = {}", table.columns.join(","));
    let _ = writeln!(s, "rows = {}", table.rows.len());
    for (k, v) in config.entries() {
        let _ = writeln!(s, "{k} = {v}");
    }
    let _ = writeln!(s, "tol_trace_preservation = {:e}", ch::TRACE_PRESERVATION_TOL);
    let _ = writeln!(s, "tol_hermiticity_preservation = {:e}", ch::HERMITICITY_PRESERVATION_TOL);
    let _ = writeln!(s, "tol_choi_positivity = {:e}", ch::CHOI_POSITIVITY_TOL);
    let _ = writeln!(s, "tol_mixing_gap = {:e}", ch::MIXING_GAP_TOL);
    let _ = writeln!(s, "tol_fixed_point_residual = {:e}", ch::FIXED_POINT_RESIDUAL_TOL);
    for (i, note) in table.notes.iter().enumerate() {
        let _ = writeln!(s, "note_{i} = {note}");
    }
    for c in &table.checks {
        let _ = writeln!(
            s,
            "check.{} = {} (value {:e}, tolerance {:e})",
            c.name.replace(' ', "_"),
            if c.passed { "pass" } else { "fail" },
            c.value,
            c.tolerance
        );
    }
    s
}

pub fn write_metadata(csv: &Path, config: &ExperimentConfig, table: &Table) -> CliResult<PathBuf> {
    let path = metadata_path(csv);
    std::fs::write(&path, metadata(config, table)).map_err(|source| CliError::Output {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
