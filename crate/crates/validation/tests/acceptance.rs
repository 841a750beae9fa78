//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use distill_cli::config::{Experiment, ExperimentConfig};
use distill_cli::experiments;
use distill_core::channels::{self, AncillaSpin, DetectorVariant, MomentumDistribution, QuadratureSpec, ScatteringChannels};
use distill_core::linalg::{self, frobenius, unvectorize, vectorize, Mat4, Vec16, C64};
use distill_core::scattering::{self, spin_up, ScatterPair};
use distill_core::sector::{self, SectorMatrix};
use distill_core::spin_algebra::{singlet_projector_ab, triplet_projector_ab};
use distill_core::trajectory::{self, CycleBranches, EnsembleSummary, ProtocolVariant, TrajectoryConfig};
use distill_core::{AbState, PhysicalParams, Superoperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHI: f64 = 2.5 * PI;
const G: f64 = PI;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(parts: &[(bool, String)]) -> Verdict {
    Verdict {
        passed: parts.iter().all(|(ok, _)| *ok),
        detail: parts
            .iter()
            .map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "[x] " }))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn le(name: &str, value: f64, tol: f64) -> (bool, String) {
    (value <= tol, format!("{name} {value:.3e} <= {tol:e}"))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn within(name: &str, elapsed: Duration, limit: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < limit, format!("{name} {s:.3}s < {limit}s"))
}

fn random_state(rng: &mut impl Rng) -> Mat4 {
    let a = Mat4::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = a * a.adjoint();
    rho / linalg::trace(&rho)
}

fn random_kappa_g(rng: &mut impl Rng) -> (f64, f64) {
    (rng.random_range(0.1 * PI..6.0 * PI), rng.random_range(0.1..10.0))
}

fn c1_unitarity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (worst, elapsed) = timed(|| {
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let (k, g) = random_kappa_g(&mut rng);
            let p = ScatterPair::at(k, g).expect("valid momentum");
            let defect = p.t.adjoint() * p.t + p.r.adjoint() * p.r - distill_core::linalg::Mat8::identity();
            worst = worst.max(frobenius(&defect));
        }
        worst
    });
    verdict(&[le("max |T'T + R'R - 1|_F", worst, 1e-12), within("runtime", elapsed, 1.0)])
}

fn c2_resonant_forms() -> Verdict {
    let mut worst = 0.0f64;
    for n in 1..=5 {
        for g in [0.5, PI, 5.0] {
            let general = ScatterPair::at(n as f64 * PI, g).unwrap();
            let resonant = ScatterPair::resonant(n, g).unwrap();
            worst = worst
                .max(frobenius(&(general.t - resonant.t)))
                .max(frobenius(&(general.r - resonant.r)));
        }
    }
    verdict(&[le("max deviation", worst, 1e-12)])
}

fn c3_singlet_transparency() -> Verdict {
    let config = ExperimentConfig::defaults(Experiment::Fig2);
    let mut worst = 0.0f64;
    for n in 1..=5 {
        for g in config.g_grid.points() {
            let p = PhysicalParams {
                kappa: n as f64 * PI,
                g: g * PI,
                ..Default::default()
            };
            let t = scattering::transmission_probability(&p, &spin_up(), &AbState::singlet()).unwrap();
            worst = worst.max((t - 1.0).abs());
        }
    }
    let (table, elapsed) = timed(|| experiments::fig2(&config).unwrap());
    let shape = config.kappa_grid.count == 200 && config.g_grid.count == 50 && table.rows.len() == 200 * 50;
    verdict(&[
        le("max |P_T - 1| at kappa = n pi", worst, 1e-12),
        (shape, format!("surface {}x{} = {} rows", config.kappa_grid.count, config.g_grid.count, table.rows.len())),
        within("surface runtime", elapsed, 5.0),
    ])
}

/// `|lambda_1|` by power iteration on the traceless subspace, which a
/// trace-preserving map leaves invariant. The trace is projected out every
/// step so rounding cannot seed the eigenvalue-one direction.
fn second_modulus_by_power_iteration(m: &Superoperator, rng: &mut impl Rng) -> f64 {
    let x = random_state(rng) - Mat4::identity().scale(0.25);
    let mut v: Vec16 = vectorize(&x);
    v /= C64::new(v.norm(), 0.0);
    let (burn, span) = (500, 2000);
    let mut log_growth = 0.0;
    for i in 0..burn + span {
        let y = unvectorize(&(m.matrix * v));
        v = vectorize(&(y - Mat4::identity() * (linalg::trace(&y) / C64::new(4.0, 0.0))));
        let norm = v.norm();
        if i >= burn {
            log_growth += norm.ln();
        }
        v /= C64::new(norm, 0.0);
    }
    (log_growth / span as f64).exp()
}

fn c4_mixing() -> Verdict {
    let m = channels::ideal_map(1, CHI, G).unwrap();
    let spectrum = channels::superop_spectrum(&m).unwrap();
    let unit = spectrum.iter().filter(|z| (*z - C64::new(1.0, 0.0)).norm() < 1e-8).count();
    let l1 = spectrum[1].norm();
    let oracle = second_modulus_by_power_iteration(&m, &mut ChaCha8Rng::seed_from_u64(4));
    let fixed = channels::fixed_point(&m).unwrap();
    let residual = frobenius(&(m.apply(fixed.matrix()) - fixed.matrix()));
    let to_singlet = frobenius(&(fixed.matrix() - AbState::singlet().matrix()));
    verdict(&[
        (unit == 1, format!("{unit} eigenvalue(s) at 1")),
        (l1 < 0.999, format!("|lambda1| = {l1:.9} < 0.999")),
        le("power-iteration |lambda1| gap", (oracle - l1).abs(), 1e-3),
        le("residual", residual, 1e-10),
        le("distance to singlet", to_singlet, 1e-10),
    ])
}

fn c5_convergence_curve() -> Verdict {
    let ((dev, curves), elapsed) = timed(|| {
        let mut dev = 0.0f64;
        let mut curves = Vec::new();
        for n in 1..=5u32 {
            let m = channels::ideal_map(n, CHI, G).unwrap();
            let w = sector::w_coefficient(CHI, G).unwrap();
            let v = sector::v_coefficient(n, G);
            let curve = channels::average_fidelity_curve(&m, 50);
            for (step, f) in curve.iter().enumerate() {
                let oracle = 1.0 - 0.75 * (1.0 - w * v).powi(step as i32);
                dev = dev.max((f - oracle).abs());
            }
            curves.push(curve);
        }
        (dev, curves)
    });
    let ordered = (1..=50).all(|s| curves.windows(2).all(|c| c[0][s] > c[1][s]));
    verdict(&[
        le("max |F(N) - closed form|", dev, 1e-10),
        (curves[0][25] >= 0.99, format!("F(25) = {:.6} >= 0.99", curves[0][25])),
        (ordered, "F_1 > F_2 > ... > F_5 for 1 <= N <= 50".into()),
        within("runtime", elapsed, 1.0),
    ])
}

/// Sector populations read straight from the matrix elements.
fn populations(rho: &Mat4) -> [f64; 2] {
    let pm = linalg::trace(&(singlet_projector_ab() * rho)).re;
    let pp = linalg::trace(&(triplet_projector_ab() * rho)).re;
    [pm, pp]
}

fn coherence(rho: &Mat4) -> f64 {
    frobenius(&(singlet_projector_ab() * rho * triplet_projector_ab()))
}

fn c6_sector_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut closure = 0.0f64;
    let mut min_coherence = f64::INFINITY;
    for _ in 0..1000 {
        let (k, g) = random_kappa_g(&mut rng);
        let c = ScatteringChannels::at(k, g, AncillaSpin::Unpolarized).unwrap();
        let pairs = [(&c.t, sector::sector_t(k, g).unwrap()), (&c.r, sector::sector_r(k, g).unwrap())];
        for (map, analytic) in &pairs {
            let from_singlet = populations(&map.apply(&singlet_projector_ab()));
            let from_triplet = populations(&map.apply(&triplet_projector_ab().scale(1.0 / 3.0)));
            let extracted = SectorMatrix::new([
                [from_singlet[0], from_triplet[0]],
                [from_singlet[1], from_triplet[1]],
            ]);
            worst = worst.max(extracted.max_abs_diff(analytic));
        }
        let rho = random_state(&mut rng);
        min_coherence = min_coherence.min(coherence(&rho));
        let before = populations(&rho);
        for (map, analytic) in &pairs {
            let after = populations(&map.apply(&rho));
            let predicted = analytic.apply(before);
            closure = closure.max((after[0] - predicted[0]).abs()).max((after[1] - predicted[1]).abs());
        }
    }
    verdict(&[
        le("max |analytic - extracted|", worst, 1e-12),
        le("closure defect", closure, 1e-12),
        (min_coherence > 1e-3, format!("min singlet-triplet coherence {min_coherence:.3e}")),
    ])
}

/// Abscissae where the piecewise-linear interpolant of `ys` crosses `level`.
fn crossings(xs: &[f64], ys: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..xs.len() - 1 {
        let (a, b) = (ys[i] - level, ys[i + 1] - level);
        if a * b < 0.0 {
            out.push(xs[i] + a / (a - b) * (xs[i + 1] - xs[i]));
        }
    }
    out
}

fn c7_stationary_fidelity() -> Verdict {
    let xs: Vec<f64> = (1..=100).map(|i| 0.9 + 0.2 * i as f64 / 101.0).collect();
    let mut dev = 0.0f64;
    let mut fs = Vec::new();
    for &x in &xs {
        let formula = sector::fixed_fidelity(&sector::sector_protocol(x * PI, CHI, G).unwrap()).unwrap();
        let p = PhysicalParams {
            kappa: x * PI,
            ..Default::default()
        };
        let eigen = channels::fixed_point(&channels::protocol_map(&p).unwrap()).unwrap().singlet_fidelity();
        dev = dev.max((formula - eigen).abs());
        fs.push(formula);
    }
    let step = xs[1] - xs[0];
    let limit = 0.01 + 0.2 * step;
    let cross = crossings(&xs, &fs, 0.5);
    let below = cross.iter().copied().filter(|&x| x < 1.0).fold(f64::NAN, f64::max);
    let above = cross.iter().copied().filter(|&x| x > 1.0).fold(f64::NAN, f64::min);
    let ok = |x: f64| x.is_finite() && (x - 1.0).abs() < limit;
    verdict(&[
        le("max |formula - eigenvector|", dev, 1e-8),
        (
            ok(below) && ok(above),
            format!(
                "F_* = 0.5 at kappa/pi = {below:.5}, {above:.5}; required |kappa/pi - 1| < {limit:.5}"
            ),
        ),
    ])
}

fn averaged_fidelity(n: u32, width: f64) -> f64 {
    sector::averaged_sector(n, width, CHI, G).unwrap().1
}

/// Fixed high-order rule on a wider window, no refinement.
fn reference_fidelity(n: u32, width: f64) -> f64 {
    let dist = MomentumDistribution::Gaussian {
        center: n as f64 * PI,
        width,
        chi: CHI,
    };
    let spec = QuadratureSpec { nodes: 20_000, sigmas: 10.0 };
    sector::fixed_fidelity(&sector::averaged_sector_over(&dist, G, spec).unwrap()).unwrap()
}

fn c8_gaussian() -> Verdict {
    let widths: Vec<f64> = (1..=40).map(|i| 0.005 * i as f64 * PI).collect();
    let curves: Vec<Vec<f64>> = (1..=3).map(|n| widths.iter().map(|&w| averaged_fidelity(n, w)).collect()).collect();
    let mut converged = 0.0f64;
    for n in 1..=3u32 {
        for (i, &w) in widths.iter().enumerate() {
            converged = converged.max((curves[n as usize - 1][i] - reference_fidelity(n, w)).abs());
        }
    }
    let at = averaged_fidelity(1, 0.05 * PI);
    let dist = MomentumDistribution::Gaussian {
        center: PI,
        width: 0.05 * PI,
        chi: CHI,
    };
    let full = channels::fixed_point(&channels::averaged_map(&dist, G).unwrap()).unwrap().singlet_fidelity();
    let monotone = curves[0].windows(2).all(|w| w[1] < w[0]);
    let ordered = (0..widths.len()).all(|i| curves[0][i] < curves[1][i] && curves[1][i] < curves[2][i]);
    verdict(&[
        (at > 0.4 && at < 0.7, format!("F~(0.05 pi) = {at:.6} in (0.4, 0.7)")),
        le("full map vs populations", (at - full).abs(), 1e-8),
        (monotone, "strictly decreasing on (0, 0.2 pi]".into()),
        (ordered, "F_n1 < F_n2 < F_n3".into()),
        le("refined vs 20000-node 10-sigma rule", converged, 1e-8),
    ])
}

fn cycles_to_reach(m: &Superoperator, target: f64, cap: usize) -> Option<usize> {
    channels::average_fidelity_curve(m, cap).iter().position(|f| *f >= target)
}

fn c9_detectors() -> Verdict {
    let base = PhysicalParams::default();
    let mut case_i = 0.0f64;
    let mut reach = Vec::new();
    for eta in [1.0, 0.75, 0.5, 0.25] {
        let m = channels::detector_map(&PhysicalParams { eta, ..base }, DetectorVariant::I).unwrap();
        case_i = case_i.max((channels::fixed_point(&m).unwrap().singlet_fidelity() - 1.0).abs());
        reach.push(cycles_to_reach(&m, 0.99, 10_000));
    }
    let slower = reach.iter().all(Option::is_some) && reach.windows(2).all(|w| w[1] > w[0]);
    let v = sector::v_coefficient(1, G);
    let mut case_ii = 0.0f64;
    for i in 0..=20 {
        let eta = i as f64 / 20.0;
        let m = channels::detector_map(&PhysicalParams { eta, ..base }, DetectorVariant::II).unwrap();
        let oracle = ((1.0 - eta) + eta * v) / (4.0 * (1.0 - eta) + eta * v);
        case_ii = case_ii.max((channels::fixed_point(&m).unwrap().singlet_fidelity() - oracle).abs());
    }
    let end0 = sector::detector_ii_fidelity(1, G, 0.0);
    let end1 = sector::detector_ii_fidelity(1, G, 1.0);
    verdict(&[
        le("case I |F_* - 1|", case_i, 1e-8),
        (slower, format!("cycles to 0.99 for eta = 1, .75, .5, .25: {reach:?}")),
        le("case II |F_* - formula|", case_ii, 1e-10),
        le("case II endpoints", (end0 - 0.25).abs().max((end1 - 1.0).abs()), 1e-10),
    ])
}

fn c10_trajectories() -> Verdict {
    let cfg = TrajectoryConfig::new(PhysicalParams::default(), 30, 10);
    let (summary, elapsed) = timed(|| EnsembleSummary::from_records(&trajectory::run_ensemble(&cfg, 10_000).unwrap()));
    let channel = trajectory::deterministic_channel(&cfg).unwrap();
    let det = channels::iterate(&channel, &cfg.rho0, 30);
    let distance = linalg::trace_distance(&summary.mean_final_state, det[30].matrix());
    let se = summary.final_state_std_error;
    let fid_gap = (summary.mean_fidelity[30] - det[30].singlet_fidelity()).abs();

    let mut defect = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for variant in [ProtocolVariant::Ideal, ProtocolVariant::DetectorI, ProtocolVariant::DetectorII] {
        let mut c = cfg.clone();
        c.variant = variant;
        c.params.eta = 0.6;
        let ch = trajectory::deterministic_channel(&c).unwrap();
        let b = CycleBranches::new(&c).unwrap();
        let record = trajectory::run_trajectory(&c).unwrap();
        let mut states: Vec<Mat4> = (0..50).map(|_| random_state(&mut rng)).collect();
        states.push(*record.final_state.matrix());
        for rho in &states {
            defect = defect.max(b.unraveling_defect(&ch, rho));
        }
    }
    verdict(&[
        (distance <= 3.0 * se, format!("trace distance {distance:.3e} <= 3 SE = {:.3e}", 3.0 * se)),
        (
            fid_gap <= 3.0 * summary.std_error[30],
            format!("F(30) gap {fid_gap:.3e} <= 3 SE = {:.3e}", 3.0 * summary.std_error[30]),
        ),
        le("per-cycle unraveling defect", defect, 1e-12),
        within("10^4 x 30 runtime", elapsed, 30.0),
    ])
}

fn c11_cpt() -> Verdict {
    let mut maps: Vec<Superoperator> = Vec::new();
    for n in 1..=5 {
        maps.push(channels::ideal_map(n, CHI, G).unwrap());
    }
    for i in 0..40 {
        let kappa = (0.1 + 0.1 * i as f64) * PI;
        let p = PhysicalParams {
            kappa,
            ..Default::default()
        };
        maps.push(channels::protocol_map(&p).unwrap());
        let c = ScatteringChannels::at(kappa, G, AncillaSpin::Unpolarized).unwrap();
        maps.push(c.s());
    }
    for n in 1..=3u32 {
        for width in [0.01, 0.05, 0.2] {
            let dist = MomentumDistribution::Gaussian {
                center: n as f64 * PI,
                width: width * PI,
                chi: CHI,
            };
            maps.push(channels::averaged_map(&dist, G).unwrap());
        }
    }
    maps.push(
        channels::averaged_map(
            &MomentumDistribution::GaussianJoint {
                center: PI,
                width: 0.05 * PI,
                chi_center: CHI,
                chi_width: 0.1 * PI,
            },
            G,
        )
        .unwrap(),
    );
    for i in 0..=10 {
        let p = PhysicalParams {
            eta: i as f64 / 10.0,
            ..Default::default()
        };
        maps.push(channels::detector_map(&p, DetectorVariant::I).unwrap());
        maps.push(channels::detector_map(&p, DetectorVariant::II).unwrap());
    }
    let mut trace = 0.0f64;
    let mut herm = 0.0f64;
    let mut choi = f64::INFINITY;
    for m in &maps {
        trace = trace.max(m.trace_defect());
        herm = herm.max(m.hermiticity_defect());
        choi = choi.min(m.choi_min_eigenvalue());
    }
    verdict(&[
        (true, format!("{} maps", maps.len())),
        le("trace preservation", trace, 1e-12),
        le("Hermiticity preservation", herm, 1e-12),
        (choi >= -1e-10, format!("min Choi eigenvalue {choi:.3e} >= -1e-10")),
    ])
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("unitarity", c1_unitarity),
        ("resonant specialization", c2_resonant_forms),
        ("singlet transparency", c3_singlet_transparency),
        ("fixed point and mixing", c4_mixing),
        ("convergence curve", c5_convergence_curve),
        ("sector-matrix equivalence", c6_sector_equivalence),
        ("stationary fidelity near resonance", c7_stationary_fidelity),
        ("gaussian robustness", c8_gaussian),
        ("detector efficiency", c9_detectors),
        ("trajectory unraveling", c10_trajectories),
        ("CPT certification", c11_cpt),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        if !v.passed {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if v.passed { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
