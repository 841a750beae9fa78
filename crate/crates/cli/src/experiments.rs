//! One function per experiment. Each returns a [`Table`] whose rows are in
//! grid order, plus sanity checks on the data.

use std::f64::consts::PI;

use distill_core::channels::{self, DetectorVariant, MomentumDistribution};
use distill_core::linalg;
use distill_core::scattering::{self, spin_up};
use distill_core::sector;
use distill_core::trajectory::{self, CycleBranches, EnsembleSummary, ProtocolVariant, TrajectoryConfig};
use distill_core::{AbState, PhysicalParams, Result as CoreResult};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliResult;
use crate::output::{Cell, Check, Table};
use crate::validate;

pub fn run(config: &ExperimentConfig) -> CliResult<Table> {
    config.validate()?;
    Ok(match config.experiment {
        Experiment::Fig2 => fig2(config)?,
        Experiment::Fig3 => fig3(config)?,
        Experiment::Fig5a => fig5(config, Sweep::Chi)?,
        Experiment::Fig5b => fig5(config, Sweep::G)?,
        Experiment::Fig6 => fig6(config)?,
        Experiment::Fig7 => fig7(config)?,
        Experiment::Fig8a => fig8a(config)?,
        Experiment::Fig8b => fig8b(config)?,
        Experiment::Fig9 => fig9(config)?,
        Experiment::Fig10 => fig10(config)?,
        Experiment::WqSurface => wq_surface(config)?,
        Experiment::Trajectories => trajectories(config)?,
        Experiment::Validate => validate::run(config)?,
    })
}

/// Evaluates `f` on every item in parallel and keeps item order.
fn par_rows<T, F>(items: &[T], f: F) -> CoreResult<Vec<Vec<Cell>>>
where
    T: Sync,
    F: Fn(&T) -> CoreResult<Vec<Cell>> + Sync + Send,
{
    items.par_iter().map(f).collect()
}

fn grid2(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect()
}

/// Linear-interpolated abscissae where `ys` crosses `level`.
pub fn crossings(xs: &[f64], ys: &[f64], level: f64) -> Vec<f64> {
    xs.windows(2)
        .zip(ys.windows(2))
        .filter(|(_, y)| (y[0] - level) * (y[1] - level) < 0.0)
        .map(|(x, y)| x[0] + (level - y[0]) * (x[1] - x[0]) / (y[1] - y[0]))
        .collect()
}

/// Transmission probability of `|up> (x) |singlet>` over (kappa, g).
/// Columns: `kappa_over_pi, g_over_pi, transmission`.
pub fn fig2(c: &ExperimentConfig) -> CliResult<Table> {
    let ks = c.kappa_grid.points();
    let gs = c.g_grid.points();
    let singlet = AbState::singlet();
    let up = spin_up();
    let transmission = |kappa: f64, g: f64| {
        let p = PhysicalParams {
            kappa,
            g,
            ..Default::default()
        };
        scattering::transmission_probability(&p, &up, &singlet)
    };
    let mut t = Table::new(vec!["kappa_over_pi", "g_over_pi", "transmission"]);
    t.rows = par_rows(&grid2(&ks, &gs), |&(k, g)| {
        Ok(vec![k.into(), g.into(), transmission(k * PI, g * PI)?.into()])
    })?;
    let max = t.column("transmission").unwrap().into_iter().fold(0.0, f64::max);
    t.checks.push(Check::at_most("transmission bounded by one", max - 1.0, 1e-12));
    let n_max = c.kappa_grid.stop.floor() as u32;
    let mut ridge = 0.0f64;
    for n in 1..=n_max.max(1) {
        for &g in &gs {
            ridge = ridge.max((transmission(n as f64 * PI, g * PI)? - 1.0).abs());
        }
    }
    t.checks.push(Check::at_most("singlet transparent at kappa = n pi", ridge, 1e-12));
    Ok(t)
}

/// The shaking coefficient `W_q` over (chi, g).
/// Columns: `chi_over_pi, g_over_pi, w_q`.
pub fn wq_surface(c: &ExperimentConfig) -> CliResult<Table> {
    let qs = c.chi_grid.points();
    let gs = c.g_grid.points();
    let mut t = Table::new(vec!["chi_over_pi", "g_over_pi", "w_q"]);
    t.rows = par_rows(&grid2(&qs, &gs), |&(q, g)| {
        Ok(vec![q.into(), g.into(), sector::w_coefficient(q * PI, g * PI)?.into()])
    })?;
    let min = t.column("w_q").unwrap().into_iter().fold(f64::INFINITY, f64::min);
    t.checks.push(Check::at_least("w_q non-negative", min, 0.0));
    let mut zero = 0.0f64;
    for n in 1..=(c.chi_grid.stop.floor() as u32).max(1) {
        for &g in &gs {
            zero = zero.max(sector::w_coefficient(n as f64 * PI, g * PI)?);
        }
    }
    t.checks.push(Check::at_most("w_q vanishes at chi = n pi", zero, 1e-20));
    Ok(t)
}

/// Average fidelity `F(N)` of the ideal protocol for `n = 1..5`.
/// Columns: `N, F_n1, F_n2, F_n3, F_n4, F_n5`.
pub fn fig3(c: &ExperimentConfig) -> CliResult<Table> {
    let p = c.params();
    let ns: Vec<u32> = (1..=5).collect();
    let curves: Vec<Vec<f64>> = ns
        .par_iter()
        .map(|&n| Ok(channels::average_fidelity_curve(&channels::ideal_map(n, p.chi, p.g)?, c.cycles)))
        .collect::<CoreResult<_>>()?;
    let mut t = Table::new(vec!["N", "F_n1", "F_n2", "F_n3", "F_n4", "F_n5"]);
    for step in 0..=c.cycles {
        let mut row = vec![Cell::from(step)];
        row.extend(curves.iter().map(|f| Cell::from(f[step])));
        t.push(row);
    }
    let mut dev = 0.0f64;
    for (i, &n) in ns.iter().enumerate() {
        for (step, f) in curves[i].iter().enumerate() {
            dev = dev.max((f - sector::closed_form_curve(n, p.chi, p.g, 0.25, step)?).abs());
        }
    }
    t.checks.push(Check::at_most("iteration matches closed form", dev, 1e-10));
    let ordered = (1..=c.cycles).all(|s| curves.windows(2).all(|w| w[0][s] > w[1][s]));
    t.checks.push(Check::holds("curves ordered in n", ordered, "F_n > F_(n+1) for N >= 1"));
    if c.cycles >= 25 {
        t.notes.push(format!("F_n{}(25) = {:.6}", ns[0], curves[0][25]));
    }
    Ok(t)
}

enum Sweep {
    Chi,
    G,
}

/// `F(N)` for a list of shaking momenta (fig5a) or couplings (fig5b).
/// Columns: `chi_over_pi, N, fidelity` or `g_over_pi, N, fidelity`.
fn fig5(c: &ExperimentConfig, sweep: Sweep) -> CliResult<Table> {
    let p = c.params();
    let (label, values) = match sweep {
        Sweep::Chi => ("chi_over_pi", &c.chi_list),
        Sweep::G => ("g_over_pi", &c.g_list),
    };
    let curves: Vec<Vec<f64>> = values
        .par_iter()
        .map(|&v| {
            let (chi, g) = match sweep {
                Sweep::Chi => (v * PI, p.g),
                Sweep::G => (p.chi, v * PI),
            };
            Ok(channels::average_fidelity_curve(&channels::ideal_map(c.n, chi, g)?, c.cycles))
        })
        .collect::<CoreResult<_>>()?;
    let mut t = Table::new(vec![label, "N", "fidelity"]);
    let mut monotone = true;
    for (v, f) in values.iter().zip(&curves) {
        for (step, x) in f.iter().enumerate() {
            t.push(vec![(*v).into(), step.into(), (*x).into()]);
        }
        monotone &= f.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    }
    t.checks.push(Check::holds("fidelity non-decreasing in N", monotone, "every curve"));
    Ok(t)
}

/// Leading eigenvalue moduli of the protocol map over kappa.
/// Columns: `kappa_over_pi, lambda0, lambda1`.
pub fn fig6(c: &ExperimentConfig) -> CliResult<Table> {
    let base = c.params();
    let ks = c.kappa_grid.points();
    let mut t = Table::new(vec!["kappa_over_pi", "lambda0", "lambda1"]);
    t.rows = par_rows(&ks, |&k| {
        let m = channels::protocol_map(&PhysicalParams { kappa: k * PI, ..base })?;
        let (l0, l1) = channels::leading_moduli(&m)?;
        Ok(vec![k.into(), l0.into(), l1.into()])
    })?;
    let dev = t
        .column("lambda0")
        .unwrap()
        .iter()
        .fold(0.0f64, |a, l| a.max((l - 1.0).abs()));
    t.checks.push(Check::at_most("|lambda0| = 1", dev, 1e-10));
    let gap = t.column("lambda1").unwrap().into_iter().fold(0.0, f64::max);
    t.notes.push(format!("largest |lambda1| on the grid = {gap:.9}"));
    Ok(t)
}

/// Stationary singlet weight over kappa, from the population formula and
/// from the stationary state of the full map.
/// Columns: `kappa_over_pi, f_star_formula, f_star_eigen`.
pub fn fig7(c: &ExperimentConfig) -> CliResult<Table> {
    let base = c.params();
    let ks = c.kappa_grid.points();
    let mut t = Table::new(vec!["kappa_over_pi", "f_star_formula", "f_star_eigen"]);
    t.rows = par_rows(&ks, |&k| {
        let formula = sector::fixed_fidelity(&sector::sector_protocol(k * PI, base.chi, base.g)?)?;
        let m = channels::protocol_map(&PhysicalParams { kappa: k * PI, ..base })?;
        let eigen = channels::fixed_point(&m)?.singlet_fidelity();
        Ok(vec![k.into(), formula.into(), eigen.into()])
    })?;
    let f = t.column("f_star_formula").unwrap();
    let e = t.column("f_star_eigen").unwrap();
    let dev = f.iter().zip(&e).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    t.checks.push(Check::at_most("formula matches stationary state", dev, 1e-8));
    let n = c.n as f64;
    let cross = crossings(&ks, &f, 0.5);
    let below = cross.iter().copied().filter(|&x| x < n).fold(f64::NAN, f64::max);
    let above = cross.iter().copied().filter(|&x| x > n).fold(f64::NAN, f64::min);
    t.notes.push(format!(
        "F_* = 0.5 nearest kappa/pi = {n}: {below:.6} and {above:.6} (grid step {:.3e})",
        c.kappa_grid.resolution()
    ));
    Ok(t)
}

fn averaged_fidelity(c: &ExperimentConfig, n: u32, width: f64, g: f64) -> CoreResult<f64> {
    let p = c.params();
    Ok(sector::averaged_sector_with(n, width * PI, p.chi, g, c.quadrature())?.1)
}

/// Gaussian-averaged stationary fidelity over the width for `n = 1, 2, 3`.
/// Columns: `delta_kappa_over_pi, F_n1, F_n2, F_n3`.
pub fn fig8a(c: &ExperimentConfig) -> CliResult<Table> {
    let g = c.params().g;
    let widths = c.delta_kappa_grid.points();
    let mut t = Table::new(vec!["delta_kappa_over_pi", "F_n1", "F_n2", "F_n3"]);
    t.rows = par_rows(&widths, |&w| {
        let mut row = vec![Cell::from(w)];
        for n in 1..=3 {
            row.push(averaged_fidelity(c, n, w, g)?.into());
        }
        Ok(row)
    })?;
    let cols: Vec<Vec<f64>> = ["F_n1", "F_n2", "F_n3"].iter().map(|k| t.column(k).unwrap()).collect();
    let monotone = cols.iter().all(|f| f.windows(2).all(|x| x[1] <= x[0] + 1e-12));
    t.checks.push(Check::holds("non-increasing in width", monotone, "n = 1, 2, 3"));
    let ordered = widths
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .all(|(i, _)| cols[0][i] <= cols[1][i] && cols[1][i] <= cols[2][i]);
    t.checks.push(Check::holds("larger n is more robust", ordered, "F_n1 <= F_n2 <= F_n3"));
    t.notes.push(format!("F_n1 at width 0.05 pi = {:.6}", averaged_fidelity(c, 1, 0.05, g)?));
    Ok(t)
}

/// Gaussian-averaged stationary fidelity over (width, g) at `n`.
/// Columns: `delta_kappa_over_pi, g_over_pi, fidelity`.
pub fn fig8b(c: &ExperimentConfig) -> CliResult<Table> {
    let widths = c.delta_kappa_grid.points();
    let gs = c.g_grid.points();
    let mut t = Table::new(vec!["delta_kappa_over_pi", "g_over_pi", "fidelity"]);
    t.rows = par_rows(&grid2(&widths, &gs), |&(w, g)| {
        Ok(vec![w.into(), g.into(), averaged_fidelity(c, c.n, w, g * PI)?.into()])
    })?;
    let f = t.column("fidelity").unwrap();
    let in_range = f.iter().all(|x| (0.0..=1.0 + 1e-12).contains(x));
    t.checks.push(Check::holds("fidelity in [0, 1]", in_range, "every grid point"));
    Ok(t)
}

/// `F~(N)` under a Gaussian spread `delta_kappa` for `n = 1, 2, 3`.
/// Columns: `N, F_n1, F_n2, F_n3`.
pub fn fig9(c: &ExperimentConfig) -> CliResult<Table> {
    let p = c.params();
    let ns = [1u32, 2, 3];
    let curves: Vec<(Vec<f64>, f64)> = ns
        .par_iter()
        .map(|&n| {
            let dist = MomentumDistribution::Gaussian {
                center: n as f64 * PI,
                width: p.delta_kappa,
                chi: p.chi,
            };
            let m = channels::averaged_map_converged(
                &dist,
                p.g,
                c.quadrature(),
                channels::QUADRATURE_REFINEMENT_TOL,
                channels::MAX_QUADRATURE_NODES,
            )?
            .value;
            let fixed = sector::averaged_sector_with(n, p.delta_kappa, p.chi, p.g, c.quadrature())?.1;
            Ok((channels::average_fidelity_curve(&m, c.cycles), fixed))
        })
        .collect::<CoreResult<_>>()?;
    let mut t = Table::new(vec!["N", "F_n1", "F_n2", "F_n3"]);
    for step in 0..=c.cycles {
        let mut row = vec![Cell::from(step)];
        row.extend(curves.iter().map(|(f, _)| Cell::from(f[step])));
        t.push(row);
    }
    let monotone = curves.iter().all(|(f, _)| f.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    t.checks.push(Check::holds("fidelity non-decreasing in N", monotone, "n = 1, 2, 3"));
    let bounded = curves.iter().all(|(f, fixed)| f.iter().all(|x| *x <= fixed + 1e-10));
    t.checks.push(Check::holds("bounded by stationary fidelity", bounded, "n = 1, 2, 3"));
    for (n, (_, fixed)) in ns.iter().zip(&curves) {
        t.notes.push(format!("stationary F~ for n = {n}: {fixed:.6}"));
    }
    Ok(t)
}

/// `F(N)` with detector efficiency `eta`, for both miss strategies.
/// Columns: `eta, N, fidelity_case_i, fidelity_case_ii`.
pub fn fig10(c: &ExperimentConfig) -> CliResult<Table> {
    let p = c.params();
    let runs: Vec<(Vec<f64>, Vec<f64>, f64)> = c
        .eta_list
        .par_iter()
        .map(|&eta| {
            let q = PhysicalParams { eta, ..p };
            let m1 = channels::detector_map(&q, DetectorVariant::I)?;
            let m2 = channels::detector_map(&q, DetectorVariant::II)?;
            let fixed2 = channels::fixed_point(&m2)?.singlet_fidelity();
            Ok((
                channels::average_fidelity_curve(&m1, c.cycles),
                channels::average_fidelity_curve(&m2, c.cycles),
                (fixed2 - sector::detector_ii_fidelity(p.n, p.g, eta)).abs(),
            ))
        })
        .collect::<CoreResult<_>>()?;
    let mut t = Table::new(vec!["eta", "N", "fidelity_case_i", "fidelity_case_ii"]);
    for (eta, (f1, f2, _)) in c.eta_list.iter().zip(&runs) {
        for step in 0..=c.cycles {
            t.push(vec![(*eta).into(), step.into(), f1[step].into(), f2[step].into()]);
        }
    }
    let dev = runs.iter().fold(0.0f64, |a, r| a.max(r.2));
    t.checks.push(Check::at_most("case II stationary fidelity formula", dev, 1e-10));
    let mut order: Vec<(f64, f64)> = c.eta_list.iter().zip(&runs).map(|(e, r)| (*e, r.0[c.cycles])).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ordered = order.windows(2).all(|w| w[0].0 == w[1].0 || w[0].1 <= w[1].1 + 1e-12);
    t.checks.push(Check::holds("case I faster for larger eta", ordered, "F(N_max) ordered by eta"));
    Ok(t)
}

/// Seeded Monte Carlo ensemble against the deterministic channel.
/// Columns: `N, mean_fidelity, std_error, deterministic_fidelity,
/// tail_fraction`.
pub fn trajectories(c: &ExperimentConfig) -> CliResult<Table> {
    let mut params = c.params();
    if c.variant != ProtocolVariant::Ideal {
        params.kappa = params.kappa_n();
    }
    let mut cfg = TrajectoryConfig::new(params, c.cycles, c.seed);
    cfg.variant = c.variant;
    let records = trajectory::run_ensemble(&cfg, c.n_traj)?;
    let summary = EnsembleSummary::from_records(&records);
    let channel = trajectory::deterministic_channel(&cfg)?;
    let det = channels::iterate(&channel, &cfg.rho0, c.cycles);
    let mut t = Table::new(vec!["N", "mean_fidelity", "std_error", "deterministic_fidelity", "tail_fraction"]);
    for step in 0..=c.cycles {
        t.push(vec![
            step.into(),
            summary.mean_fidelity[step].into(),
            summary.std_error[step].into(),
            det[step].singlet_fidelity().into(),
            trajectory::tail_fraction(&records, step, c.threshold).into(),
        ]);
    }
    let distance = linalg::trace_distance(&summary.mean_final_state, det[c.cycles].matrix());
    let se = summary.final_state_std_error;
    t.checks.push(Check {
        name: "ensemble mean within 3 standard errors".into(),
        passed: distance <= 3.0 * se,
        value: distance,
        tolerance: 3.0 * se,
        detail: format!("trace distance {distance:.3e} vs 3 SE = {:.3e}", 3.0 * se),
    });
    let branches = CycleBranches::new(&cfg)?;
    let defect = det
        .iter()
        .map(|rho| branches.unraveling_defect(&channel, rho.matrix()))
        .fold(0.0f64, f64::max);
    t.checks.push(Check::at_most("branch maps sum to the channel", defect, 1e-12));
    Ok(t)
}
