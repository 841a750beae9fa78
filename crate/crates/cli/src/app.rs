//! Argument parsing and the run loop behind the `distill` binary.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::experiments;
use crate::output;

/// Reproduce the protocol's figures as CSV.
///
/// Momenta and the coupling are in units of pi. Grids are `start:stop:count`,
/// lists are comma separated. Flags override values from `--config`.
#[derive(Debug, Parser)]
#[command(name = "distill", version)]
pub struct Args {
    /// fig2, fig3, fig5a, fig5b, fig6, fig7, fig8a, fig8b, fig9, fig10,
    /// wq-surface, trajectories or validate
    pub experiment: String,
    /// File of `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV (default `<experiment>.csv`); metadata goes to `<out>.meta`
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub threads: Option<String>,
    /// Resonant-shot momentum kd/pi
    #[arg(long)]
    pub kappa: Option<String>,
    /// Shaking momentum qd/pi
    #[arg(long)]
    pub chi: Option<String>,
    /// Coupling in units of pi
    #[arg(long)]
    pub g: Option<String>,
    /// Resonance index
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub delta_kappa: Option<String>,
    /// Detector efficiency
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub cycles: Option<String>,
    #[arg(long)]
    pub n_traj: Option<String>,
    /// Gauss-Legendre nodes per Gaussian average
    #[arg(long)]
    pub nodes: Option<String>,
    /// Half-width of the quadrature window in Gaussian widths
    #[arg(long)]
    pub sigmas: Option<String>,
    /// ideal, detector-i or detector-ii
    #[arg(long)]
    pub variant: Option<String>,
    /// Singlet-weight threshold for the trajectory tail fraction
    #[arg(long)]
    pub threshold: Option<String>,
    #[arg(long)]
    pub kappa_grid: Option<String>,
    #[arg(long)]
    pub chi_grid: Option<String>,
    #[arg(long)]
    pub g_grid: Option<String>,
    #[arg(long)]
    pub delta_kappa_grid: Option<String>,
    #[arg(long)]
    pub chi_list: Option<String>,
    #[arg(long)]
    pub g_list: Option<String>,
    #[arg(long)]
    pub eta_list: Option<String>,
}

impl Args {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let all = [
            ("out", &self.out),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("kappa", &self.kappa),
            ("chi", &self.chi),
            ("g", &self.g),
            ("n", &self.n),
            ("delta_kappa", &self.delta_kappa),
            ("eta", &self.eta),
            ("cycles", &self.cycles),
            ("n_traj", &self.n_traj),
            ("nodes", &self.nodes),
            ("sigmas", &self.sigmas),
            ("variant", &self.variant),
            ("threshold", &self.threshold),
            ("kappa_grid", &self.kappa_grid),
            ("chi_grid", &self.chi_grid),
            ("g_grid", &self.g_grid),
            ("delta_kappa_grid", &self.delta_kappa_grid),
            ("chi_list", &self.chi_list),
            ("g_list", &self.g_list),
            ("eta_list", &self.eta_list),
        ];
        all.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))).collect()
    }
}

/// Builds the configuration: experiment defaults, then the config file,
/// then flags.
pub fn configure(args: &Args) -> CliResult<ExperimentConfig> {
    let experiment: Experiment = args.experiment.parse()?;
    let mut config = ExperimentConfig::defaults(experiment);
    if let Some(path) = &args.config {
        config.apply_file(path)?;
    }
    for (k, v) in args.overrides() {
        config.set(k, v)?;
    }
    config.validate()?;
    Ok(config)
}

/// Runs one experiment end to end and returns the summary text.
pub fn execute(config: &ExperimentConfig) -> CliResult<String> {
    if let Some(threads) = config.threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let table = experiments::run(config)?;
    table.write_csv(&config.out)?;
    let meta = output::write_metadata(&config.out, config, &table)?;
    let mut summary = table.summary(config.experiment.name());
    summary.push_str(&format!("  wrote {} and {}\n", config.out.display(), meta.display()));
    let failed = table.failed_checks();
    if failed > 0 {
        print!("{summary}");
        return Err(CliError::ChecksFailed {
            failed,
            total: table.checks.len(),
        });
    }
    Ok(summary)
}

/// Process entry point; returns the exit status.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let _ = e.print();
            let err = CliError::Usage(e.kind().to_string());
            eprintln!("{}", err.machine_line());
            return err.exit_code();
        }
    };
    match configure(&args).and_then(|c| execute(&c)) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.machine_line());
            e.exit_code()
        }
    }
}
