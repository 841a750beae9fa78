//! Channels on `AB` induced by scattering an ancilla, and the protocol maps
//! built from them.
//!
//! Every map is stored as a 16x16 superoperator matrix acting on the
//! column-major vectorization of a 4x4 density matrix (see [`crate::linalg`]).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul};

use nalgebra::DMatrix;

use crate::error::{DistillError, Result};
use crate::linalg::{self, kron, re, unvectorize, vectorize, Mat16, Mat2, Mat4, Vec16, C64};
use crate::quadrature;
use crate::scattering::{PhysicalParams, ScatterPair};
use crate::spin_algebra::{singlet_projector_ab, triplet_projector_ab, x_block, AbState, SpinOperator};

/// Tolerances used by [`Superoperator::certify`].
pub const TRACE_PRESERVATION_TOL: f64 = 1e-12;
pub const HERMITICITY_PRESERVATION_TOL: f64 = 1e-12;
pub const CHOI_POSITIVITY_TOL: f64 = 1e-10;

/// A map is declared mixing when the second-largest eigenvalue modulus is
/// below `1 - MIXING_GAP_TOL`.
pub const MIXING_GAP_TOL: f64 = 1e-9;
pub const FIXED_POINT_RESIDUAL_TOL: f64 = 1e-10;

/// Spin state of an incident ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AncillaSpin {
    #[default]
    Unpolarized,
    /// Always `|up>`; repeating this at every step breaks the protocol.
    PolarizedUp,
}

impl AncillaSpin {
    pub fn density(&self) -> Mat2 {
        match self {
            AncillaSpin::Unpolarized => Mat2::identity().scale(0.5),
            AncillaSpin::PolarizedUp => {
                let mut m = Mat2::zeros();
                m[(0, 0)] = re(1.0);
                m
            }
        }
    }
}

/// Strategy when a detector misses the resonant ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorVariant {
    /// Proceed directly to the next resonant shot.
    I,
    /// Proceed to the off-resonant shot as if the ancilla was reflected.
    II,
}

#[derive(Clone, PartialEq)]
pub struct Superoperator {
    pub matrix: Mat16,
    pub label: String,
}

impl fmt::Debug for Superoperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Superoperator").field("label", &self.label).finish_non_exhaustive()
    }
}

/// Outcome of the complete-positivity and trace-preservation checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptReport {
    pub trace_defect: f64,
    pub hermiticity_defect: f64,
    pub choi_min_eigenvalue: f64,
}

impl CptReport {
    pub fn passes(&self) -> bool {
        self.trace_defect < TRACE_PRESERVATION_TOL
            && self.hermiticity_defect < HERMITICITY_PRESERVATION_TOL
            && self.choi_min_eigenvalue >= -CHOI_POSITIVITY_TOL
    }
}

fn basis_element(i: usize, j: usize) -> Mat4 {
    let mut m = Mat4::zeros();
    m[(i, j)] = re(1.0);
    m
}

impl Superoperator {
    pub fn new(matrix: Mat16, label: impl Into<String>) -> Self {
        Superoperator {
            matrix,
            label: label.into(),
        }
    }

    pub fn identity() -> Self {
        Self::new(Mat16::identity(), "identity")
    }

    pub fn zero(label: impl Into<String>) -> Self {
        Self::new(Mat16::zeros(), label)
    }

    /// `rho -> A rho B^dag`.
    pub fn sandwich(a: &Mat4, b: &Mat4, label: impl Into<String>) -> Self {
        Self::new(kron(&b.conjugate(), a), label)
    }

    /// `rho -> Tr_X{ op (ancilla (x) rho) op^dag }`.
    pub fn from_scattering(op: &SpinOperator, ancilla: &Mat2, label: impl Into<String>) -> Self {
        let mut m = Mat16::zeros();
        for x_out in 0..2 {
            for x in 0..2 {
                let left = x_block(op, x_out, x);
                for y in 0..2 {
                    let w = ancilla[(x, y)];
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let right = x_block(op, x_out, y);
                    let term: Mat16 = kron(&right.conjugate(), &left);
                    m += term * w;
                }
            }
        }
        Self::new(m, label)
    }

    /// Singlet projection `rho -> P_- rho P_-`.
    pub fn singlet_projection() -> Self {
        let p = singlet_projector_ab();
        Self::sandwich(&p, &p, "P-")
    }

    /// Triplet projection `rho -> P_+ rho P_+`.
    pub fn triplet_projection() -> Self {
        let p = triplet_projector_ab();
        Self::sandwich(&p, &p, "P+")
    }

    pub fn apply(&self, rho: &Mat4) -> Mat4 {
        unvectorize(&(self.matrix * vectorize(rho)))
    }

    pub fn apply_state(&self, rho: &AbState) -> AbState {
        AbState::from_matrix_unchecked(self.apply(rho.matrix()))
    }

    /// `self` after `first`, i.e. `rho -> self(first(rho))`.
    pub fn after(&self, first: &Superoperator) -> Self {
        Self::new(
            self.matrix * first.matrix,
            format!("{} . {}", self.label, first.label),
        )
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self::new(self.matrix.scale(w), format!("{w}*{}", self.label))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `w self + (1 - w) other`.
    pub fn convex(&self, w: f64, other: &Superoperator) -> Self {
        Self::new(
            self.matrix.scale(w) + other.matrix.scale(1.0 - w),
            format!("{w}*{} + {}*{}", self.label, 1.0 - w, other.label),
        )
    }

    /// Choi matrix `sum_ij |i><j| (x) S(|i><j|)`.
    pub fn choi(&self) -> Mat16 {
        let mut c = Mat16::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let out = self.apply(&basis_element(i, j));
                c.fixed_view_mut::<4, 4>(4 * i, 4 * j).copy_from(&out);
            }
        }
        c
    }

    /// Largest deviation of `S^dag vec(1)` from `vec(1)`.
    pub fn trace_defect(&self) -> f64 {
        let id = vectorize(&Mat4::identity());
        (self.matrix.adjoint() * id - id).camax()
    }

    /// Largest `||S(E_ij)^dag - S(E_ji)||_F` over matrix units.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let a = self.apply(&basis_element(i, j)).adjoint();
                let b = self.apply(&basis_element(j, i));
                worst = worst.max(linalg::frobenius(&(a - b)));
            }
        }
        worst
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.choi())[0]
    }

    pub fn certify(&self) -> CptReport {
        CptReport {
            trace_defect: self.trace_defect(),
            hermiticity_defect: self.hermiticity_defect(),
            choi_min_eigenvalue: self.choi_min_eigenvalue(),
        }
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;

    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator::new(self.matrix + rhs.matrix, format!("{} + {}", self.label, rhs.label))
    }
}

impl Mul for &Superoperator {
    type Output = Superoperator;

    fn mul(self, rhs: &Superoperator) -> Superoperator {
        self.after(rhs)
    }
}

/// Transmission, reflection and total scattering channels at one momentum.
#[derive(Debug, Clone)]
pub struct ScatteringChannels {
    pub t: Superoperator,
    pub r: Superoperator,
}

impl ScatteringChannels {
    pub fn at(kappa: f64, g: f64, ancilla: AncillaSpin) -> Result<Self> {
        let pair = ScatterPair::at(kappa, g)?;
        Ok(Self::from_pair(&pair, g, ancilla))
    }

    pub fn from_pair(pair: &ScatterPair, g: f64, ancilla: AncillaSpin) -> Self {
        let sigma = ancilla.density();
        let tag = format!("kd/pi={}, G={}", pair.kappa / PI, g);
        ScatteringChannels {
            t: Superoperator::from_scattering(&pair.t, &sigma, format!("T({tag})")),
            r: Superoperator::from_scattering(&pair.r, &sigma, format!("R({tag})")),
        }
    }

    pub fn s(&self) -> Superoperator {
        let label = self.t.label.replacen('T', "S", 1);
        (&self.t + &self.r).with_label(label)
    }
}

pub fn channel_t(params: &PhysicalParams) -> Result<Superoperator> {
    Ok(ScatteringChannels::at(params.kappa, params.g, AncillaSpin::Unpolarized)?.t)
}

pub fn channel_r(params: &PhysicalParams) -> Result<Superoperator> {
    Ok(ScatteringChannels::at(params.kappa, params.g, AncillaSpin::Unpolarized)?.r)
}

pub fn channel_s(params: &PhysicalParams) -> Result<Superoperator> {
    Ok(ScatteringChannels::at(params.kappa, params.g, AncillaSpin::Unpolarized)?.s())
}

/// `chi` within this distance of a multiple of `pi` makes the shaking step
/// inert.
pub const RESONANT_CHI_WARNING: f64 = 1e-6 * PI;

pub fn chi_is_resonant(chi: f64) -> bool {
    let m = (chi / PI).round();
    m >= 1.0 && (chi - m * PI).abs() < RESONANT_CHI_WARNING
}

/// One protocol cycle `T_k + S_q R_k`, with the momenta in `params.kappa`
/// and `params.chi`.
pub fn protocol_map(params: &PhysicalParams) -> Result<Superoperator> {
    protocol_map_with_spins(params, AncillaSpin::Unpolarized, AncillaSpin::Unpolarized)
}

/// As [`protocol_map`] but with explicit ancilla spins for the resonant
/// shot and the shaking shot.
pub fn protocol_map_with_spins(
    params: &PhysicalParams,
    resonant_spin: AncillaSpin,
    shake_spin: AncillaSpin,
) -> Result<Superoperator> {
    params.validate()?;
    if chi_is_resonant(params.chi) {
        log::warn!(
            "chi = {} pi is resonant: the shaking step cannot feed the singlet and the map is not mixing",
            params.chi / PI
        );
    }
    let k = ScatteringChannels::at(params.kappa, params.g, resonant_spin)?;
    let q = ScatteringChannels::at(params.chi, params.g, shake_spin)?;
    Ok(compose_protocol(&k, &q.s()).with_label(format!(
        "M(kd/pi={}, qd/pi={}, G={})",
        params.kappa / PI,
        params.chi / PI,
        params.g
    )))
}

fn compose_protocol(k: &ScatteringChannels, s_q: &Superoperator) -> Superoperator {
    Superoperator::new(k.t.matrix + s_q.matrix * k.r.matrix, "M")
}

/// The ideal map at `kappa_n = n pi` for the given `n`, `chi`, `g`.
pub fn ideal_map(n: u32, chi: f64, g: f64) -> Result<Superoperator> {
    protocol_map(&PhysicalParams::resonant(n, chi, g))
}

/// Protocol map for detectors of efficiency `params.eta`. The resonant leg
/// sits at `kappa_n`.
pub fn detector_map(params: &PhysicalParams, variant: DetectorVariant) -> Result<Superoperator> {
    params.validate()?;
    let resonant = PhysicalParams {
        kappa: params.kappa_n(),
        ..*params
    };
    let m = protocol_map(&resonant)?;
    let s_k = ScatteringChannels::at(resonant.kappa, params.g, AncillaSpin::Unpolarized)?.s();
    let miss = match variant {
        DetectorVariant::I => s_k,
        DetectorVariant::II => {
            let s_q = ScatteringChannels::at(params.chi, params.g, AncillaSpin::Unpolarized)?.s();
            s_q.after(&s_k)
        }
    };
    let eta = params.eta;
    Ok(Superoperator::new(
        m.matrix.scale(eta) + miss.matrix.scale(1.0 - eta),
        format!("M_eta^({variant:?})(eta={eta}, n={}, qd/pi={}, G={})", params.n, params.chi / PI, params.g),
    ))
}

/// A distribution of incident momenta `(kappa, chi)` for the averaged map.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentumDistribution {
    /// Monochromatic ancillas.
    Point { kappa: f64, chi: f64 },
    /// Gaussian in `kappa` truncated to `kappa > 0`, point mass in `chi`.
    Gaussian {
        center: f64,
        width: f64,
        chi: f64,
    },
    /// Independent truncated Gaussians in both momenta.
    GaussianJoint {
        center: f64,
        width: f64,
        chi_center: f64,
        chi_width: f64,
    },
    /// Arbitrary joint weights `(kappa, chi, w)`; renormalized over
    /// `kappa, chi > 0`.
    Weighted(Vec<(f64, f64, f64)>),
}

/// Quadrature settings for Gaussian distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub nodes: usize,
    /// Half-width of the integration window in units of the Gaussian width.
    pub sigmas: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes: 201, sigmas: 8.0 }
    }
}

/// Below this fraction of the untruncated mass on `k > 0` a distribution is
/// rejected.
pub const MASS_FLOOR: f64 = 1e-12;

/// One-dimensional truncated Gaussian nodes with weights summing to one.
pub fn gaussian_nodes(center: f64, width: f64, spec: QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    if !(width >= 0.0) || !center.is_finite() {
        return Err(DistillError::InvalidParams(format!(
            "gaussian needs finite center and width >= 0, got ({center}, {width})"
        )));
    }
    if width == 0.0 {
        if center > 0.0 {
            return Ok(vec![(center, 1.0)]);
        }
        return Err(DistillError::InsufficientMass(0.0));
    }
    let lo = (center - spec.sigmas * width).max(0.0);
    let hi = center + spec.sigmas * width;
    if hi <= 0.0 {
        return Err(DistillError::InsufficientMass(0.0));
    }
    let (x, w) = quadrature::gauss_legendre_on(spec.nodes, lo, hi);
    let raw: Vec<(f64, f64)> = x
        .into_iter()
        .zip(w)
        .map(|(k, w)| (k, w * (-(k - center).powi(2) / (2.0 * width * width)).exp()))
        .collect();
    let mass: f64 = raw.iter().map(|(_, w)| w).sum();
    let full = width * (2.0 * PI).sqrt();
    if !(mass / full > MASS_FLOOR) {
        return Err(DistillError::InsufficientMass(mass / full));
    }
    Ok(raw.into_iter().map(|(k, w)| (k, w / mass)).collect())
}

/// Marginal node sets `(kappa nodes, chi nodes)` for product distributions,
/// or `None` for a general joint distribution.
fn product_nodes(
    dist: &MomentumDistribution,
    spec: QuadratureSpec,
) -> Result<Option<(Vec<(f64, f64)>, Vec<(f64, f64)>)>> {
    Ok(match dist {
        MomentumDistribution::Point { kappa, chi } => Some((vec![(*kappa, 1.0)], vec![(*chi, 1.0)])),
        MomentumDistribution::Gaussian { center, width, chi } => {
            Some((gaussian_nodes(*center, *width, spec)?, vec![(*chi, 1.0)]))
        }
        MomentumDistribution::GaussianJoint {
            center,
            width,
            chi_center,
            chi_width,
        } => Some((
            gaussian_nodes(*center, *width, spec)?,
            gaussian_nodes(*chi_center, *chi_width, spec)?,
        )),
        MomentumDistribution::Weighted(_) => None,
    })
}

/// Momentum average of `T_k + S_q R_k`, refined from the default
/// quadrature until converged to [`QUADRATURE_REFINEMENT_TOL`].
///
/// For product distributions this is `E[T_k] + E[S_q] E[R_k]`.
pub fn averaged_map(dist: &MomentumDistribution, g: f64) -> Result<Superoperator> {
    Ok(averaged_map_converged(
        dist,
        g,
        QuadratureSpec::default(),
        QUADRATURE_REFINEMENT_TOL,
        MAX_QUADRATURE_NODES,
    )?
    .value)
}

/// [`averaged_map`] at a fixed quadrature.
pub fn averaged_map_with(dist: &MomentumDistribution, g: f64, spec: QuadratureSpec) -> Result<Superoperator> {
    let label = format!("M~({dist:?}, G={g}, nodes={})", spec.nodes);
    if let Some((k_nodes, q_nodes)) = product_nodes(dist, spec)? {
        let mut t = Mat16::zeros();
        let mut r = Mat16::zeros();
        for &(k, w) in &k_nodes {
            let c = ScatteringChannels::at(k, g, AncillaSpin::Unpolarized)?;
            t += c.t.matrix.scale(w);
            r += c.r.matrix.scale(w);
        }
        let mut s = Mat16::zeros();
        for &(q, w) in &q_nodes {
            s += ScatteringChannels::at(q, g, AncillaSpin::Unpolarized)?.s().matrix.scale(w);
        }
        return Ok(Superoperator::new(t + s * r, label));
    }
    let MomentumDistribution::Weighted(points) = dist else {
        unreachable!("non-product distributions are weighted")
    };
    let kept: Vec<_> = points
        .iter()
        .filter(|(k, q, w)| *k > 0.0 && *q > 0.0 && *w > 0.0)
        .collect();
    let mass: f64 = kept.iter().map(|(_, _, w)| w).sum();
    let total: f64 = points.iter().map(|(_, _, w)| w.max(0.0)).sum();
    if !(total > 0.0) || !(mass / total > MASS_FLOOR) {
        return Err(DistillError::InsufficientMass(if total > 0.0 { mass / total } else { 0.0 }));
    }
    let mut m = Mat16::zeros();
    for &&(k, q, w) in &kept {
        let kc = ScatteringChannels::at(k, g, AncillaSpin::Unpolarized)?;
        let s = ScatteringChannels::at(q, g, AncillaSpin::Unpolarized)?.s();
        m += compose_protocol(&kc, &s).matrix.scale(w / mass);
    }
    Ok(Superoperator::new(m, label))
}

/// Stop refining once the largest entrywise change of a doubling is below
/// this.
pub const QUADRATURE_REFINEMENT_TOL: f64 = 1e-11;
/// Node-count ceiling for refinement (six doublings of the default).
pub const MAX_QUADRATURE_NODES: usize = 201 << 6;

/// Result of a node-doubling refinement.
#[derive(Debug, Clone)]
pub struct Converged<T> {
    pub value: T,
    pub nodes: usize,
    /// Largest entrywise change in the last doubling.
    pub last_change: f64,
}

impl<T> Converged<T> {
    pub fn is_converged(&self, tol: f64) -> bool {
        self.last_change < tol
    }
}

/// Evaluates `eval` at `spec` and doubles the node count until the largest
/// change reported by `change` is below `tol`, or `max_nodes` is reached.
pub fn refine_quadrature<T>(
    spec: QuadratureSpec,
    tol: f64,
    max_nodes: usize,
    eval: impl Fn(QuadratureSpec) -> Result<T>,
    change: impl Fn(&T, &T) -> f64,
) -> Result<Converged<T>> {
    let mut spec = spec;
    let mut prev = eval(spec)?;
    loop {
        let next_spec = QuadratureSpec {
            nodes: spec.nodes * 2,
            ..spec
        };
        let next = eval(next_spec)?;
        let delta = change(&prev, &next);
        if delta < tol || next_spec.nodes >= max_nodes {
            if delta >= tol {
                log::warn!("quadrature stopped at {} nodes with change {delta:e}", next_spec.nodes);
            }
            return Ok(Converged {
                value: next,
                nodes: next_spec.nodes,
                last_change: delta,
            });
        }
        spec = next_spec;
        prev = next;
    }
}

/// Doubles the node count from `spec.nodes` until the largest entrywise
/// change of the averaged map is below `tol` (at most `max_nodes`).
pub fn averaged_map_converged(
    dist: &MomentumDistribution,
    g: f64,
    spec: QuadratureSpec,
    tol: f64,
    max_nodes: usize,
) -> Result<Converged<Superoperator>> {
    refine_quadrature(
        spec,
        tol,
        max_nodes,
        |s| averaged_map_with(dist, g, s),
        |a, b| (a.matrix - b.matrix).camax(),
    )
}

/// The 16 eigenvalues sorted by descending modulus.
pub fn superop_spectrum(s: &Superoperator) -> Result<Vec<C64>> {
    let schur = nalgebra::Schur::try_new(s.matrix, 1e-15, 10_000)
        .ok_or_else(|| DistillError::EigenFailure(s.label.clone()))?;
    let (_, t) = schur.unpack();
    let mut ev: Vec<C64> = (0..16).map(|i| t[(i, i)]).collect();
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(DistillError::EigenFailure(s.label.clone()));
    }
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(ev)
}

/// `(|lambda_0|, |lambda_1|)`.
pub fn leading_moduli(s: &Superoperator) -> Result<(f64, f64)> {
    let ev = superop_spectrum(s)?;
    Ok((ev[0].norm(), ev[1].norm()))
}

pub fn is_mixing(s: &Superoperator) -> Result<bool> {
    Ok(leading_moduli(s)?.1 < 1.0 - MIXING_GAP_TOL)
}

/// Unique stationary state of a mixing trace-preserving map.
pub fn fixed_point(s: &Superoperator) -> Result<AbState> {
    let (_, second) = leading_moduli(s)?;
    if second >= 1.0 - MIXING_GAP_TOL {
        return Err(DistillError::NotMixing {
            label: s.label.clone(),
            second_modulus: second,
        });
    }
    let shifted = DMatrix::from_fn(16, 16, |i, j| {
        s.matrix[(i, j)] - if i == j { re(1.0) } else { re(0.0) }
    });
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| DistillError::EigenFailure(s.label.clone()))?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("16 singular values");
    let v = Vec16::from_fn(|i, _| v_t[(idx, i)].conj());
    let candidate = unvectorize(&v);
    let tr = linalg::trace(&candidate);
    if tr.norm() < 1e-8 {
        return Err(numerical(s, "stationary vector is traceless", tr.norm()));
    }
    let rho = candidate / tr;
    let herm = linalg::hermiticity_defect(&rho);
    if herm > 1e-8 {
        return Err(numerical(s, "stationary vector is not Hermitian", herm));
    }
    let rho = (rho + rho.adjoint()).scale(0.5);
    let residual = linalg::frobenius(&(s.apply(&rho) - rho));
    if residual > FIXED_POINT_RESIDUAL_TOL {
        return Err(numerical(s, "fixed-point residual too large", residual));
    }
    let state = AbState::from_matrix_unchecked(rho);
    let min = state.min_eigenvalue();
    if min < -crate::spin_algebra::POSITIVITY_TOL {
        return Err(numerical(s, "stationary state is not positive", min));
    }
    Ok(state)
}

fn numerical(s: &Superoperator, detail: &str, residual: f64) -> DistillError {
    DistillError::NumericalFailure {
        label: s.label.clone(),
        detail: detail.into(),
        residual,
    }
}

/// `[rho0, s(rho0), ..., s^n(rho0)]`.
pub fn iterate(s: &Superoperator, rho0: &AbState, n: usize) -> Vec<AbState> {
    let mut out = Vec::with_capacity(n + 1);
    let mut v = vectorize(rho0.matrix());
    out.push(rho0.clone());
    for _ in 0..n {
        v = s.matrix * v;
        out.push(AbState::from_matrix_unchecked(unvectorize(&v)));
    }
    out
}

/// `Tr{P_- s^N(1/4)}`.
pub fn average_fidelity(s: &Superoperator, n: usize) -> f64 {
    average_fidelity_curve(s, n)[n]
}

/// [`average_fidelity`] for every `N` in `0..=n`.
pub fn average_fidelity_curve(s: &Superoperator, n: usize) -> Vec<f64> {
    iterate(s, &AbState::maximally_mixed(), n)
        .iter()
        .map(AbState::singlet_fidelity)
        .collect()
}

/// Singlet and triplet populations `(Tr P_- rho, Tr P_+ rho)`.
pub fn sector_populations(rho: &Mat4) -> (f64, f64) {
    let pm = linalg::trace(&(singlet_projector_ab() * rho)).re;
    let pp = linalg::trace(&(triplet_projector_ab() * rho)).re;
    (pm, pp)
}

/// Reads the 2x2 population-transfer matrix of a channel by feeding it the
/// normalized singlet and triplet projectors. Columns: (singlet, triplet).
pub fn extract_sector(s: &Superoperator) -> [[f64; 2]; 2] {
    let from_singlet = sector_populations(&s.apply(&singlet_projector_ab()));
    let from_triplet = sector_populations(&s.apply(&triplet_projector_ab().scale(1.0 / 3.0)));
    [
        [from_singlet.0, from_triplet.0],
        [from_singlet.1, from_triplet.1],
    ]
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    /// Deterministic pseudo-random density matrices (including
    /// singlet-triplet coherences) from a fixed linear congruential stream.
    pub fn sample_states(count: usize, seed: u64) -> Vec<Mat4> {
        let mut x = seed;
        let mut next = move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        (0..count)
            .map(|_| {
                let a = Mat4::from_fn(|_, _| C64::new(next(), next()));
                let rho = a * a.adjoint();
                rho / linalg::trace(&rho)
            })
            .collect()
    }
}
