//! The invariant suite behind `distill validate`.

use std::f64::consts::PI;

use distill_core::channels::{self, AncillaSpin, DetectorVariant, MomentumDistribution, QuadratureSpec};
use distill_core::linalg::{self, frobenius, Mat4, C64};
use distill_core::scattering::{self, spin_up, ScatterPair};
use distill_core::sector::{self, SectorMatrix};
use distill_core::trajectory::{self, CycleBranches, EnsembleSummary, TrajectoryConfig};
use distill_core::{AbState, PhysicalParams, Result as CoreResult, Superoperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{Check, Table};

const RANDOM_POINTS: usize = 1000;
const VALIDATE_TRAJECTORIES: usize = 2000;

/// Random density matrix with full support and generic coherences.
pub fn random_state(rng: &mut impl Rng) -> Mat4 {
    let a = Mat4::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = a * a.adjoint();
    rho / linalg::trace(&rho)
}

fn random_kappa_g(rng: &mut impl Rng) -> (f64, f64) {
    (rng.random_range(0.1 * PI..6.0 * PI), rng.random_range(0.1..10.0))
}

pub fn run(config: &ExperimentConfig) -> CliResult<Table> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let p = config.params();
    let mut checks = vec![
        unitarity(&mut rng)?,
        resonant_forms()?,
        singlet_transparency()?,
    ];
    checks.extend(mixing(&p)?);
    checks.push(closed_form(&p)?);
    checks.extend(sector_equivalence(&mut rng)?);
    checks.push(stationary_formula(&p)?);
    checks.extend(gaussian(&p, config.quadrature())?);
    checks.extend(detectors(&p)?);
    checks.extend(unraveling(&p, config.seed)?);
    checks.push(cpt_zoo(&p)?);

    let mut t = Table::new(vec!["check", "passed", "value", "tolerance"]);
    for c in &checks {
        t.push(vec![c.name.as_str().into(), (c.passed as usize).into(), c.value.into(), c.tolerance.into()]);
    }
    t.checks = checks;
    Ok(t)
}

fn unitarity(rng: &mut impl Rng) -> CoreResult<Check> {
    let mut worst = 0.0f64;
    for _ in 0..RANDOM_POINTS {
        let (k, g) = random_kappa_g(rng);
        worst = worst.max(ScatterPair::at(k, g)?.unitarity_defect());
    }
    Ok(Check::at_most("unitarity", worst, 1e-12))
}

fn resonant_forms() -> CoreResult<Check> {
    let mut worst = 0.0f64;
    for n in 1..=5 {
        for g in [0.5, PI, 5.0] {
            let general = ScatterPair::at(n as f64 * PI, g)?;
            let resonant = ScatterPair::resonant(n, g)?;
            worst = worst.max(frobenius(&(general.t - resonant.t)));
            worst = worst.max(frobenius(&(general.r - resonant.r)));
        }
    }
    Ok(Check::at_most("resonant closed forms", worst, 1e-12))
}

fn singlet_transparency() -> CoreResult<Check> {
    let mut worst = 0.0f64;
    for n in 1..=5 {
        for g in [0.1, 0.5, 1.0, PI, 5.0, 10.0] {
            let p = PhysicalParams {
                kappa: n as f64 * PI,
                g,
                ..Default::default()
            };
            let t = scattering::transmission_probability(&p, &spin_up(), &AbState::singlet())?;
            worst = worst.max((t - 1.0).abs());
        }
    }
    Ok(Check::at_most("singlet transparency", worst, 1e-12))
}

fn mixing(p: &PhysicalParams) -> CoreResult<Vec<Check>> {
    let m = channels::ideal_map(p.n, p.chi, p.g)?;
    let spectrum = channels::superop_spectrum(&m)?;
    let unit = spectrum.iter().filter(|z| (*z - C64::new(1.0, 0.0)).norm() < 1e-8).count();
    let fixed = channels::fixed_point(&m)?;
    let residual = frobenius(&(m.apply(fixed.matrix()) - fixed.matrix()));
    let to_singlet = frobenius(&(fixed.matrix() - AbState::singlet().matrix()));
    Ok(vec![
        Check::holds("eigenvalue one is simple", unit == 1, format!("{unit} unit eigenvalue(s)")),
        Check::at_most("second eigenvalue modulus", spectrum[1].norm(), 0.999),
        Check::at_most("fixed point is the singlet", residual.max(to_singlet), 1e-10),
    ])
}

fn closed_form(p: &PhysicalParams) -> CoreResult<Check> {
    let mut worst = 0.0f64;
    for n in 1..=5 {
        let curve = channels::average_fidelity_curve(&channels::ideal_map(n, p.chi, p.g)?, 50);
        for (step, f) in curve.iter().enumerate() {
            worst = worst.max((f - sector::closed_form_curve(n, p.chi, p.g, 0.25, step)?).abs());
        }
    }
    Ok(Check::at_most("closed-form convergence curve", worst, 1e-10))
}

fn sector_equivalence(rng: &mut impl Rng) -> CoreResult<Vec<Check>> {
    let mut worst = 0.0f64;
    let mut closure = 0.0f64;
    for _ in 0..RANDOM_POINTS {
        let (k, g) = random_kappa_g(rng);
        let c = channels::ScatteringChannels::at(k, g, AncillaSpin::Unpolarized)?;
        let t = SectorMatrix::new(channels::extract_sector(&c.t));
        let r = SectorMatrix::new(channels::extract_sector(&c.r));
        worst = worst.max(t.max_abs_diff(&sector::sector_t(k, g)?));
        worst = worst.max(r.max_abs_diff(&sector::sector_r(k, g)?));

        let rho = random_state(rng);
        let (pm, pp) = channels::sector_populations(&rho);
        for (map, s) in [(&c.t, sector::sector_t(k, g)?), (&c.r, sector::sector_r(k, g)?)] {
            let (om, op) = channels::sector_populations(&map.apply(&rho));
            let predicted = s.apply([pm, pp]);
            closure = closure.max((om - predicted[0]).abs()).max((op - predicted[1]).abs());
        }
    }
    Ok(vec![
        Check::at_most("sector matrices match channels", worst, 1e-12),
        Check::at_most("sector closure with coherences", closure, 1e-12),
    ])
}

fn stationary_formula(p: &PhysicalParams) -> CoreResult<Check> {
    let mut worst = 0.0f64;
    for i in 1..=100 {
        let kappa = (0.9 + 0.2 * i as f64 / 101.0) * PI;
        let formula = sector::fixed_fidelity(&sector::sector_protocol(kappa, p.chi, p.g)?)?;
        let m = channels::protocol_map(&PhysicalParams { kappa, ..*p })?;
        worst = worst.max((formula - channels::fixed_point(&m)?.singlet_fidelity()).abs());
    }
    Ok(Check::at_most("stationary fidelity formula", worst, 1e-8))
}

fn gaussian(p: &PhysicalParams, spec: QuadratureSpec) -> CoreResult<Vec<Check>> {
    let width = 0.05 * PI;
    let dist = MomentumDistribution::Gaussian {
        center: p.n as f64 * PI,
        width,
        chi: p.chi,
    };
    let coarse = sector::averaged_sector_with(p.n, width, p.chi, p.g, spec)?.1;
    let reference = QuadratureSpec {
        nodes: channels::MAX_QUADRATURE_NODES,
        sigmas: spec.sigmas + 4.0,
    };
    let fine = sector::fixed_fidelity(&sector::averaged_sector_over(&dist, p.g, reference)?)?;
    let full = channels::fixed_point(&channels::averaged_map(&dist, p.g)?)?.singlet_fidelity();
    Ok(vec![
        Check::at_most("gaussian quadrature converged", (coarse - fine).abs(), 1e-8),
        Check::at_most("gaussian full map matches populations", (coarse - full).abs(), 1e-8),
    ])
}

fn detectors(p: &PhysicalParams) -> CoreResult<Vec<Check>> {
    let mut case_i = 0.0f64;
    let mut case_ii = 0.0f64;
    for eta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let q = PhysicalParams { eta, ..*p };
        if eta > 0.0 {
            let f = channels::fixed_point(&channels::detector_map(&q, DetectorVariant::I)?)?.singlet_fidelity();
            case_i = case_i.max((f - 1.0).abs());
        }
        let f = channels::fixed_point(&channels::detector_map(&q, DetectorVariant::II)?)?.singlet_fidelity();
        case_ii = case_ii.max((f - sector::detector_ii_fidelity(p.n, p.g, eta)).abs());
    }
    Ok(vec![
        Check::at_most("detector case I reaches the singlet", case_i, 1e-8),
        Check::at_most("detector case II stationary formula", case_ii, 1e-10),
    ])
}

fn unraveling(p: &PhysicalParams, seed: u64) -> CoreResult<Vec<Check>> {
    let cfg = TrajectoryConfig::new(PhysicalParams { kappa: p.kappa_n(), ..*p }, 30, seed);
    let channel = trajectory::deterministic_channel(&cfg)?;
    let branches = CycleBranches::new(&cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let defect = (0..100)
        .map(|_| branches.unraveling_defect(&channel, &random_state(&mut rng)))
        .fold(0.0f64, f64::max);
    let summary = EnsembleSummary::from_records(&trajectory::run_ensemble(&cfg, VALIDATE_TRAJECTORIES)?);
    let det = channels::iterate(&channel, &cfg.rho0, cfg.cycles);
    let distance = linalg::trace_distance(&summary.mean_final_state, det[cfg.cycles].matrix());
    Ok(vec![
        Check::at_most("unraveling identity", defect, 1e-12),
        Check::at_most("trajectory mean within 3 SE", distance, 3.0 * summary.final_state_std_error),
    ])
}

fn cpt_zoo(p: &PhysicalParams) -> CoreResult<Check> {
    let mut maps: Vec<Superoperator> = Vec::new();
    for n in 1..=3 {
        maps.push(channels::ideal_map(n, p.chi, p.g)?);
    }
    for kappa in [0.37, 0.93, 1.04, 2.71] {
        maps.push(channels::protocol_map(&PhysicalParams { kappa: kappa * PI, ..*p })?);
    }
    maps.push(channels::averaged_map(
        &MomentumDistribution::Gaussian {
            center: PI,
            width: 0.05 * PI,
            chi: p.chi,
        },
        p.g,
    )?);
    for eta in [0.0, 0.5, 1.0] {
        let q = PhysicalParams { eta, ..*p };
        maps.push(channels::detector_map(&q, DetectorVariant::I)?);
        maps.push(channels::detector_map(&q, DetectorVariant::II)?);
    }
    let failing: Vec<String> = maps
        .iter()
        .filter(|m| !m.certify().passes())
        .map(|m| m.label.clone())
        .collect();
    Ok(Check::holds(
        "CPT certification",
        failing.is_empty(),
        if failing.is_empty() {
            format!("{} maps certified", maps.len())
        } else {
            format!("failing: {}", failing.join("; "))
        },
    ))
}
