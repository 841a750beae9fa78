//! Experiment configuration: defaults per experiment, `key = value` files
//! and command-line overrides.
//!
//! Momenta (`kappa`, `chi`, `delta_kappa`) and the coupling `g` are given in
//! units of pi, matching the figure axes.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use distill_core::channels::QuadratureSpec;
use distill_core::trajectory::ProtocolVariant;
use distill_core::PhysicalParams;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fig2,
    Fig3,
    Fig5a,
    Fig5b,
    Fig6,
    Fig7,
    Fig8a,
    Fig8b,
    Fig9,
    Fig10,
    WqSurface,
    Trajectories,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 13] = [
        Experiment::Fig2,
        Experiment::Fig3,
        Experiment::Fig5a,
        Experiment::Fig5b,
        Experiment::Fig6,
        Experiment::Fig7,
        Experiment::Fig8a,
        Experiment::Fig8b,
        Experiment::Fig9,
        Experiment::Fig10,
        Experiment::WqSurface,
        Experiment::Trajectories,
        Experiment::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig5a => "fig5a",
            Experiment::Fig5b => "fig5b",
            Experiment::Fig6 => "fig6",
            Experiment::Fig7 => "fig7",
            Experiment::Fig8a => "fig8a",
            Experiment::Fig8b => "fig8b",
            Experiment::Fig9 => "fig9",
            Experiment::Fig10 => "fig10",
            Experiment::WqSurface => "wq-surface",
            Experiment::Trajectories => "trajectories",
            Experiment::Validate => "validate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::UnknownExperiment(s.to_string()))
    }
}

/// Inclusive linear grid `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, count: usize) -> Self {
        Grid { start, stop, count }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 })
            .collect()
    }

    pub fn resolution(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.stop - self.start) / (self.count - 1) as f64
        }
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let bad = |reason: &str| CliError::InvalidGrid {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, c] = parts[..] else {
            return Err(bad("expected start:stop:count"));
        };
        let start: f64 = a.parse().map_err(|_| bad("start is not a number"))?;
        let stop: f64 = b.parse().map_err(|_| bad("stop is not a number"))?;
        let count: usize = c.parse().map_err(|_| bad("count is not a non-negative integer"))?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(bad("bounds must be finite"));
        }
        if count == 0 {
            return Err(bad("count must be at least 1"));
        }
        if stop < start {
            return Err(bad("stop is below start"));
        }
        Ok(Grid { start, stop, count })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub kappa: f64,
    pub chi: f64,
    pub g: f64,
    pub n: u32,
    pub delta_kappa: f64,
    pub eta: f64,
    pub cycles: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub nodes: usize,
    pub sigmas: f64,
    pub variant: ProtocolVariant,
    /// Singlet-weight threshold for the trajectory tail fraction.
    pub threshold: f64,
    pub kappa_grid: Grid,
    pub chi_grid: Grid,
    pub g_grid: Grid,
    pub delta_kappa_grid: Grid,
    pub chi_list: Vec<f64>,
    pub g_list: Vec<f64>,
    pub eta_list: Vec<f64>,
}

pub const KEYS: [&str; 22] = [
    "kappa",
    "chi",
    "g",
    "n",
    "delta_kappa",
    "eta",
    "cycles",
    "n_traj",
    "seed",
    "threads",
    "out",
    "nodes",
    "sigmas",
    "variant",
    "threshold",
    "kappa_grid",
    "chi_grid",
    "g_grid",
    "delta_kappa_grid",
    "chi_list",
    "g_list",
    "eta_list",
];

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        use Experiment::*;
        let (kappa_grid, chi_grid, g_grid) = match experiment {
            Fig2 | WqSurface => (Grid::new(0.025, 5.0, 200), Grid::new(0.025, 5.0, 200), Grid::new(0.1, 5.0, 50)),
            Fig6 => (Grid::new(0.05, 4.0, 400), Grid::new(2.5, 2.5, 1), Grid::new(1.0, 1.0, 1)),
            Fig7 => (Grid::new(0.05, 4.0, 800), Grid::new(2.5, 2.5, 1), Grid::new(1.0, 1.0, 1)),
            Fig8b => (Grid::new(1.0, 1.0, 1), Grid::new(2.5, 2.5, 1), Grid::new(0.1, 3.0, 30)),
            _ => (Grid::new(1.0, 1.0, 1), Grid::new(2.5, 2.5, 1), Grid::new(1.0, 1.0, 1)),
        };
        let cycles = match experiment {
            Fig9 | Fig10 => 100,
            Trajectories => 30,
            _ => 50,
        };
        ExperimentConfig {
            experiment,
            kappa: 1.0,
            chi: 2.5,
            g: 1.0,
            n: 1,
            delta_kappa: 0.05,
            eta: 1.0,
            cycles,
            n_traj: 10_000,
            seed: 1,
            threads: None,
            out: PathBuf::from(format!("{}.csv", experiment.name())),
            nodes: QuadratureSpec::default().nodes,
            sigmas: QuadratureSpec::default().sigmas,
            variant: ProtocolVariant::Ideal,
            threshold: 0.9,
            kappa_grid,
            chi_grid,
            g_grid,
            delta_kappa_grid: Grid::new(0.0, 0.2, 41),
            chi_list: vec![1.1, 1.25, 1.5, 2.5],
            g_list: vec![0.25, 0.5, 1.0, 2.0],
            eta_list: vec![0.25, 0.5, 0.75, 1.0],
        }
    }

    /// Applies one `key = value` setting. Hyphens in keys are read as
    /// underscores.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let invalid = |reason: String| CliError::InvalidValue {
            key: key.clone(),
            reason,
        };
        let real = |v: &str| -> CliResult<f64> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| invalid(format!("'{v}' is not a finite number")))
        };
        let count = |v: &str| -> CliResult<usize> {
            v.parse::<usize>()
                .map_err(|_| invalid(format!("'{v}' is not a non-negative integer")))
        };
        let list = |v: &str| -> CliResult<Vec<f64>> {
            let xs = v.split(',').map(|x| real(x.trim())).collect::<CliResult<Vec<_>>>()?;
            if xs.is_empty() {
                return Err(invalid("empty list".into()));
            }
            Ok(xs)
        };
        match key.as_str() {
            "kappa" => self.kappa = real(value)?,
            "chi" => self.chi = real(value)?,
            "g" => self.g = real(value)?,
            "n" => {
                self.n = value
                    .parse()
                    .map_err(|_| invalid(format!("'{value}' is not a positive integer")))?
            }
            "delta_kappa" => self.delta_kappa = real(value)?,
            "eta" => self.eta = real(value)?,
            "cycles" => self.cycles = count(value)?,
            "n_traj" => self.n_traj = count(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| invalid(format!("'{value}' is not a u64")))?
            }
            "threads" => self.threads = Some(count(value)?),
            "out" => self.out = PathBuf::from(value),
            "nodes" => self.nodes = count(value)?,
            "sigmas" => self.sigmas = real(value)?,
            "variant" => {
                self.variant = match value {
                    "ideal" => ProtocolVariant::Ideal,
                    "detector-i" | "detector_i" | "i" => ProtocolVariant::DetectorI,
                    "detector-ii" | "detector_ii" | "ii" => ProtocolVariant::DetectorII,
                    other => return Err(invalid(format!("'{other}' is not ideal, detector-i or detector-ii"))),
                }
            }
            "threshold" => self.threshold = real(value)?,
            "kappa_grid" => self.kappa_grid = value.parse()?,
            "chi_grid" => self.chi_grid = value.parse()?,
            "g_grid" => self.g_grid = value.parse()?,
            "delta_kappa_grid" => self.delta_kappa_grid = value.parse()?,
            "chi_list" => self.chi_list = list(value)?,
            "g_list" => self.g_list = list(value)?,
            "eta_list" => self.eta_list = list(value)?,
            _ => return Err(CliError::UnknownKey(key)),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Config {
            path: path.to_path_buf(),
            source,
        })?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected 'key = value'", path.display(), i + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        let invalid = |key: &str, reason: &str| {
            Err(CliError::InvalidValue {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if self.n == 0 {
            return invalid("n", "must be at least 1");
        }
        if !(self.kappa > 0.0) || !(self.kappa_grid.start > 0.0) {
            return invalid("kappa", "momenta must be positive");
        }
        if !(self.chi > 0.0) || !(self.chi_grid.start > 0.0) || self.chi_list.iter().any(|c| !(*c > 0.0)) {
            return invalid("chi", "momenta must be positive");
        }
        let zero_g = |g: &f64| *g == 0.0 || !g.is_finite();
        if zero_g(&self.g) || self.g_grid.points().iter().any(zero_g) || self.g_list.iter().any(zero_g) {
            return invalid("g", "coupling must be finite and nonzero");
        }
        if !(0.0..=1.0).contains(&self.eta) || self.eta_list.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return invalid("eta", "efficiencies must lie in [0, 1]");
        }
        if self.delta_kappa < 0.0 || self.delta_kappa_grid.start < 0.0 {
            return invalid("delta_kappa", "widths must be non-negative");
        }
        if self.nodes < 2 {
            return invalid("nodes", "need at least 2 quadrature nodes");
        }
        if !(self.sigmas > 0.0) {
            return invalid("sigmas", "must be positive");
        }
        if self.n_traj < 2 && self.experiment == Experiment::Trajectories {
            return invalid("n_traj", "need at least 2 trajectories for a standard error");
        }
        if self.threads == Some(0) {
            return invalid("threads", "must be at least 1");
        }
        Ok(())
    }

    /// Physical parameters in the library's units.
    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            kappa: self.kappa * PI,
            chi: self.chi * PI,
            g: self.g * PI,
            n: self.n,
            delta_kappa: self.delta_kappa * PI,
            eta: self.eta,
        }
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            nodes: self.nodes,
            sigmas: self.sigmas,
        }
    }

    /// Every setting as `(key, value)` for the metadata sidecar.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let join = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let variant = match self.variant {
            ProtocolVariant::Ideal => "ideal",
            ProtocolVariant::DetectorI => "detector-i",
            ProtocolVariant::DetectorII => "detector-ii",
        };
        vec![
            ("kappa", self.kappa.to_string()),
            ("chi", self.chi.to_string()),
            ("g", self.g.to_string()),
            ("n", self.n.to_string()),
            ("delta_kappa", self.delta_kappa.to_string()),
            ("eta", self.eta.to_string()),
            ("cycles", self.cycles.to_string()),
            ("n_traj", self.n_traj.to_string()),
            ("seed", self.seed.to_string()),
            ("threads", self.threads.map_or("auto".into(), |t| t.to_string())),
            ("out", self.out.display().to_string()),
            ("nodes", self.nodes.to_string()),
            ("sigmas", self.sigmas.to_string()),
            ("variant", variant.into()),
            ("threshold", self.threshold.to_string()),
            ("kappa_grid", self.kappa_grid.to_string()),
            ("chi_grid", self.chi_grid.to_string()),
            ("g_grid", self.g_grid.to_string()),
            ("delta_kappa_grid", self.delta_kappa_grid.to_string()),
            ("chi_list", join(&self.chi_list)),
            ("g_list", join(&self.g_list)),
            ("eta_list", join(&self.eta_list)),
        ]
    }
}
