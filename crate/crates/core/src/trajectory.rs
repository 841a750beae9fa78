//! Single-run Monte Carlo simulation of the feedback protocol.
//!
//! Each cycle sends a resonant ancilla and samples whether it is
//! transmitted or reflected (or, with imperfect detectors, missed). The
//! conditional state is updated with the corresponding unnormalized branch
//! map and renormalized. Averaging the conditional states over runs recovers
//! the deterministic channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{self, AncillaSpin, DetectorVariant, ScatteringChannels, Superoperator};
use crate::error::Result;
use crate::linalg::{self, Mat4};
use crate::scattering::PhysicalParams;
use crate::spin_algebra::AbState;

/// Branches with probability below this are never drawn.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolVariant {
    Ideal,
    DetectorI,
    DetectorII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Transmitted,
    /// Reflected at the resonant shot, then shaken off resonance.
    ReflectedShaken,
    /// No detector fired. Strategy I scatters nothing further; strategy II
    /// shakes as if the ancilla had been reflected.
    Missed { shaken: bool },
}

#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    /// The resonant leg uses `params.kappa`, the shaking leg `params.chi`;
    /// `params.eta` is only read by the detector variants.
    pub params: PhysicalParams,
    pub cycles: usize,
    pub variant: ProtocolVariant,
    pub seed: u64,
    pub rho0: AbState,
    pub resonant_spin: AncillaSpin,
    pub shake_spin: AncillaSpin,
}

impl TrajectoryConfig {
    pub fn new(params: PhysicalParams, cycles: usize, seed: u64) -> Self {
        TrajectoryConfig {
            params,
            cycles,
            variant: ProtocolVariant::Ideal,
            seed,
            rho0: AbState::maximally_mixed(),
            resonant_spin: AncillaSpin::Unpolarized,
            shake_spin: AncillaSpin::Unpolarized,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub outcomes: Vec<Outcome>,
    /// Singlet weight before the first cycle and after each cycle.
    pub fidelities: Vec<f64>,
    pub final_state: AbState,
}

/// The unnormalized branch maps of one protocol cycle. Their sum is the
/// deterministic protocol channel.
#[derive(Debug, Clone)]
pub struct CycleBranches {
    pub branches: Vec<(Outcome, Superoperator)>,
}

impl CycleBranches {
    pub fn new(config: &TrajectoryConfig) -> Result<Self> {
        let p = &config.params;
        p.validate()?;
        let k = ScatteringChannels::at(p.kappa, p.g, config.resonant_spin)?;
        let s_q = ScatteringChannels::at(p.chi, p.g, config.shake_spin)?.s();
        let reflected = s_q.after(&k.r);
        let eta = match config.variant {
            ProtocolVariant::Ideal => 1.0,
            _ => p.eta,
        };
        let mut branches = vec![
            (Outcome::Transmitted, k.t.scaled(eta)),
            (Outcome::ReflectedShaken, reflected.scaled(eta)),
        ];
        if eta < 1.0 {
            let s_k = k.s();
            let (outcome, miss) = match config.variant {
                ProtocolVariant::DetectorII => (Outcome::Missed { shaken: true }, s_q.after(&s_k)),
                _ => (Outcome::Missed { shaken: false }, s_k),
            };
            branches.push((outcome, miss.scaled(1.0 - eta)));
        }
        Ok(CycleBranches { branches })
    }

    /// Branch probabilities `Tr{B_i rho}`.
    pub fn probabilities(&self, rho: &Mat4) -> Vec<f64> {
        self.branches
            .iter()
            .map(|(_, b)| linalg::trace(&b.apply(rho)).re.max(0.0))
            .collect()
    }

    /// Probability and normalized post-branch state for every branch.
    /// Branches below [`MIN_BRANCH_PROBABILITY`] carry no state.
    pub fn outcomes(&self, rho: &Mat4) -> Vec<(f64, Option<Mat4>)> {
        self.branches
            .iter()
            .map(|(_, b)| {
                let out = b.apply(rho);
                let p = linalg::trace(&out).re.max(0.0);
                if p < MIN_BRANCH_PROBABILITY {
                    return (p, None);
                }
                let out = out.unscale(p);
                (p, Some((out + out.adjoint()).scale(0.5)))
            })
            .collect()
    }

    /// `|| sum_i p_i rho_i - channel(rho) ||_F` over the branch outcomes,
    /// evaluated without sampling.
    pub fn unraveling_defect(&self, channel: &Superoperator, rho: &Mat4) -> f64 {
        let mixture = self
            .outcomes(rho)
            .into_iter()
            .filter_map(|(p, state)| state.map(|s| s.scale(p)))
            .fold(Mat4::zeros(), |acc, m| acc + m);
        linalg::frobenius(&(mixture - channel.apply(rho)))
    }

    fn step(&self, rho: &Mat4, rng: &mut impl Rng) -> (Outcome, Mat4) {
        let outcomes = self.outcomes(rho);
        let total: f64 = outcomes.iter().filter(|(_, s)| s.is_some()).map(|(p, _)| p).sum();
        let mut u = rng.random::<f64>() * total;
        let mut chosen = None;
        for (i, (p, state)) in outcomes.iter().enumerate() {
            if state.is_none() {
                continue;
            }
            chosen = Some(i);
            if u < *p {
                break;
            }
            u -= p;
        }
        let i = chosen.expect("at least one branch has nonzero probability");
        let state = outcomes[i].1.expect("chosen branch carries a state");
        (self.branches[i].0, state)
    }
}

/// The deterministic channel matching `config`.
pub fn deterministic_channel(config: &TrajectoryConfig) -> Result<Superoperator> {
    let p = &config.params;
    match config.variant {
        ProtocolVariant::Ideal => channels::protocol_map_with_spins(p, config.resonant_spin, config.shake_spin),
        ProtocolVariant::DetectorI | ProtocolVariant::DetectorII => {
            let v = if config.variant == ProtocolVariant::DetectorI {
                DetectorVariant::I
            } else {
                DetectorVariant::II
            };
            let resonant = channels::protocol_map_with_spins(p, config.resonant_spin, config.shake_spin)?;
            let k = ScatteringChannels::at(p.kappa, p.g, config.resonant_spin)?;
            let s_k = k.s();
            let miss = match v {
                DetectorVariant::I => s_k,
                DetectorVariant::II => ScatteringChannels::at(p.chi, p.g, config.shake_spin)?.s().after(&s_k),
            };
            Ok(resonant.convex(p.eta, &miss))
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One run on substream 0 of `config.seed`.
pub fn run_trajectory(config: &TrajectoryConfig) -> Result<TrajectoryRecord> {
    let branches = CycleBranches::new(config)?;
    Ok(run_with(&branches, config, 0))
}

fn run_with(branches: &CycleBranches, config: &TrajectoryConfig, stream: u64) -> TrajectoryRecord {
    let mut rng = rng_for(config.seed, stream);
    let mut rho = *config.rho0.matrix();
    let mut outcomes = Vec::with_capacity(config.cycles);
    let mut fidelities = Vec::with_capacity(config.cycles + 1);
    fidelities.push(config.rho0.singlet_fidelity());
    for _ in 0..config.cycles {
        let (outcome, next) = branches.step(&rho, &mut rng);
        rho = next;
        outcomes.push(outcome);
        let f = AbState::from_matrix_unchecked(rho).singlet_fidelity();
        fidelities.push(f.clamp(0.0, 1.0));
    }
    TrajectoryRecord {
        outcomes,
        fidelities,
        final_state: AbState::from_matrix_unchecked(rho),
    }
}

/// Runs `n_traj` trajectories on substreams `0..n_traj` of `config.seed`.
/// Results are returned in substream order regardless of scheduling.
pub fn run_ensemble(config: &TrajectoryConfig, n_traj: usize) -> Result<Vec<TrajectoryRecord>> {
    let branches = CycleBranches::new(config)?;
    Ok((0..n_traj as u64)
        .into_par_iter()
        .map(|i| run_with(&branches, config, i))
        .collect())
}

#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub n_traj: usize,
    pub mean_fidelity: Vec<f64>,
    pub std_error: Vec<f64>,
    pub mean_final_state: Mat4,
    /// `sqrt( sum_i D(rho_i, mean)^2 / (n (n - 1)) )` with `D` the trace
    /// distance; zero for a single trajectory.
    pub final_state_std_error: f64,
}

impl EnsembleSummary {
    pub fn from_records(records: &[TrajectoryRecord]) -> Self {
        let n = records.len();
        assert!(n >= 1, "ensemble needs at least one trajectory");
        let len = records[0].fidelities.len();
        let mut mean = vec![0.0; len];
        for r in records {
            for (m, f) in mean.iter_mut().zip(&r.fidelities) {
                *m += f;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; len];
        for r in records {
            for ((v, f), m) in var.iter_mut().zip(&r.fidelities).zip(&mean) {
                *v += (f - m).powi(2);
            }
        }
        let std_error = var
            .iter()
            .map(|v| if n > 1 { (v / ((n - 1) as f64 * n as f64)).sqrt() } else { 0.0 })
            .collect();

        let mut mean_state = Mat4::zeros();
        for r in records {
            mean_state += r.final_state.matrix();
        }
        mean_state.unscale_mut(n as f64);
        let spread: f64 = records
            .iter()
            .map(|r| linalg::trace_distance(r.final_state.matrix(), &mean_state).powi(2))
            .sum();
        let final_state_std_error = if n > 1 {
            (spread / (n as f64 * (n - 1) as f64)).sqrt()
        } else {
            0.0
        };
        EnsembleSummary {
            n_traj: n,
            mean_fidelity: mean,
            std_error,
            mean_final_state: mean_state,
            final_state_std_error,
        }
    }
}

pub fn ensemble_average(config: &TrajectoryConfig, n_traj: usize) -> Result<EnsembleSummary> {
    let records = run_ensemble(config, n_traj)?;
    Ok(EnsembleSummary::from_records(&records))
}

/// Fraction of trajectories whose singlet weight after `cycle` cycles is
/// below `threshold`.
pub fn tail_fraction(records: &[TrajectoryRecord], cycle: usize, threshold: f64) -> f64 {
    let below = records
        .iter()
        .filter(|r| r.fidelities[cycle] < threshold)
        .count();
    below as f64 / records.len() as f64
}
