//! Singlet/triplet population model.
//!
//! Because the scattering channels are rotation covariant, the singlet and
//! triplet populations after one event depend only on the populations
//! before it. Each channel therefore reduces to a real 2x2 matrix acting on
//! `(Tr P_- rho, Tr P_+ rho)`, with row/column order (singlet, triplet).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul};

use crate::channels::{
    gaussian_nodes, refine_quadrature, Converged, DetectorVariant, MomentumDistribution, QuadratureSpec,
    MAX_QUADRATURE_NODES, QUADRATURE_REFINEMENT_TOL,
};
use crate::error::{DistillError, Result};
use crate::scattering::coefficients;

#[derive(Clone, Copy, PartialEq)]
pub struct SectorMatrix {
    pub entries: [[f64; 2]; 2],
}

impl fmt::Debug for SectorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.entries;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

impl SectorMatrix {
    pub const fn new(entries: [[f64; 2]; 2]) -> Self {
        SectorMatrix { entries }
    }

    pub fn identity() -> Self {
        Self::new([[1.0, 0.0], [0.0, 1.0]])
    }

    /// Singlet-to-singlet entry `M^{--}`.
    pub fn mm(&self) -> f64 {
        self.entries[0][0]
    }

    /// Triplet-to-singlet entry `M^{-+}`.
    pub fn mp(&self) -> f64 {
        self.entries[0][1]
    }

    pub fn pm(&self) -> f64 {
        self.entries[1][0]
    }

    pub fn pp(&self) -> f64 {
        self.entries[1][1]
    }

    pub fn column_sums(&self) -> [f64; 2] {
        [
            self.entries[0][0] + self.entries[1][0],
            self.entries[0][1] + self.entries[1][1],
        ]
    }

    /// Maps populations `(singlet, triplet)`.
    pub fn apply(&self, pops: [f64; 2]) -> [f64; 2] {
        let e = &self.entries;
        [
            e[0][0] * pops[0] + e[0][1] * pops[1],
            e[1][0] * pops[0] + e[1][1] * pops[1],
        ]
    }

    pub fn scale(&self, w: f64) -> Self {
        let e = &self.entries;
        Self::new([[w * e[0][0], w * e[0][1]], [w * e[1][0], w * e[1][1]]])
    }

    pub fn max_abs_diff(&self, other: &SectorMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.entries[i][j] - other.entries[i][j]).abs());
            }
        }
        worst
    }
}

impl Add for SectorMatrix {
    type Output = SectorMatrix;

    fn add(self, rhs: SectorMatrix) -> SectorMatrix {
        let (a, b) = (self.entries, rhs.entries);
        SectorMatrix::new([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

/// Matrix product; `a * b` applies `b` first.
impl Mul for SectorMatrix {
    type Output = SectorMatrix;

    fn mul(self, rhs: SectorMatrix) -> SectorMatrix {
        let (a, b) = (self.entries, rhs.entries);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        SectorMatrix::new(out)
    }
}

/// Triplet-to-singlet flow per off-resonant shaking event.
pub fn w_coefficient(chi: f64, g: f64) -> Result<f64> {
    let c = coefficients(chi, g)?;
    let o = c.omega;
    let u = c.detuning;
    let inner = crate::linalg::re(1.0) - crate::linalg::I * (2.0 * o) + u * (3.0 * o * o);
    Ok(c.alpha.norm_sqr() * o * o * u.norm_sqr() * (4.0 * o * o + inner.norm_sqr()))
}

/// Triplet reflection probability of a resonant ancilla at `kappa_n = n pi`.
pub fn v_coefficient(n: u32, g: f64) -> f64 {
    let o = g / (n as f64 * PI);
    let o2 = o * o;
    8.0 * o2 * (1.0 + 8.0 * o2) / ((1.0 + 16.0 * o2) * (1.0 + 4.0 * o2))
}

/// Population transfer when the ancilla is transmitted.
pub fn sector_t(kappa: f64, g: f64) -> Result<SectorMatrix> {
    let c = coefficients(kappa, g)?;
    let (a, b, o, u) = (c.alpha, c.beta, c.omega, c.detuning);
    let i = crate::linalg::I;
    let one = crate::linalg::re(1.0);
    let a2 = a.norm_sqr();
    let mm = a2 * (one - i * (4.0 * o) - u * (o * o)).norm_sqr();
    let mp = 4.0 * a2 * o.powi(4) * u.norm_sqr();
    let shared = a * u * (3.0 * o * o);
    let pp = (a + b * 2.0 + shared).norm_sqr() / 9.0 + 2.0 / 9.0 * (a - b + shared).norm_sqr();
    Ok(SectorMatrix::new([[mm, mp], [3.0 * mp, pp]]))
}

/// Population transfer when the ancilla is reflected.
pub fn sector_r(kappa: f64, g: f64) -> Result<SectorMatrix> {
    let c = coefficients(kappa, g)?;
    let (a, b, o, u) = (c.alpha, c.beta, c.omega, c.detuning);
    let i = crate::linalg::I;
    let one = crate::linalg::re(1.0);
    let mm = (one - a * (one - i * (4.0 * o)) + a * u * (o * o) + i * a * u * u * (6.0 * o.powi(3))).norm_sqr();
    let mp = a.norm_sqr() * o * o * u.norm_sqr() * (one - i * (2.0 * o) + u * (3.0 * o * o)).norm_sqr();
    let first = crate::linalg::re(3.0) - (a + b * 2.0) + i * o * ((a - b) * 2.0 + i * a * (3.0 * o)) * u;
    let second = (a - b) - i * o * (a * 2.0 + b + i * a * (3.0 * o)) * u;
    let pp = first.norm_sqr() / 9.0 + 2.0 / 9.0 * second.norm_sqr();
    Ok(SectorMatrix::new([[mm, mp], [3.0 * mp, pp]]))
}

/// Shaking matrix `[[1 - 3W, W], [3W, 1 - W]]`.
pub fn sector_s_from_w(w: f64) -> SectorMatrix {
    SectorMatrix::new([[1.0 - 3.0 * w, w], [3.0 * w, 1.0 - w]])
}

pub fn sector_s(chi: f64, g: f64) -> Result<SectorMatrix> {
    Ok(sector_t(chi, g)? + sector_r(chi, g)?)
}

/// `T_k + S_q R_k` in the population picture.
pub fn sector_protocol(kappa: f64, chi: f64, g: f64) -> Result<SectorMatrix> {
    Ok(sector_t(kappa, g)? + sector_s(chi, g)? * sector_r(kappa, g)?)
}

pub fn sector_ideal(n: u32, chi: f64, g: f64) -> Result<SectorMatrix> {
    let gain = w_coefficient(chi, g)? * v_coefficient(n, g);
    Ok(SectorMatrix::new([[1.0, gain], [0.0, 1.0 - gain]]))
}

/// Below this the fidelity denominator `1 - M^{--} + M^{-+}` is treated as
/// zero.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;

/// Singlet weight of the stationary populations:
/// `M^{-+} / (1 - M^{--} + M^{-+})`.
pub fn fixed_fidelity(m: &SectorMatrix) -> Result<f64> {
    let denom = 1.0 - m.mm() + m.mp();
    if !(denom > DEGENERATE_DENOMINATOR) {
        return Err(DistillError::FormulaInapplicable(denom));
    }
    Ok(m.mp() / denom)
}

/// Population matrix of the protocol with detector efficiency `eta`.
pub fn detector_sector(n: u32, chi: f64, g: f64, eta: f64, variant: DetectorVariant) -> Result<SectorMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(DistillError::InvalidParams(format!("eta must lie in [0, 1], got {eta}")));
    }
    let w = w_coefficient(chi, g)?;
    let v = v_coefficient(n, g);
    Ok(match variant {
        DetectorVariant::I => {
            let gain = eta * w * v;
            SectorMatrix::new([[1.0, gain], [0.0, 1.0 - gain]])
        }
        DetectorVariant::II => {
            let leak = 3.0 * (1.0 - eta) * w;
            let gain = (1.0 - eta + eta * v) * w;
            SectorMatrix::new([[1.0 - leak, gain], [leak, 1.0 - gain]])
        }
    })
}

/// Closed-form stationary singlet weight for detector strategy II.
pub fn detector_ii_fidelity(n: u32, g: f64, eta: f64) -> f64 {
    let v = v_coefficient(n, g);
    ((1.0 - eta) + eta * v) / (4.0 * (1.0 - eta) + eta * v)
}

/// Averages `sector_protocol` over a momentum distribution.
pub fn averaged_sector_over(dist: &MomentumDistribution, g: f64, spec: QuadratureSpec) -> Result<SectorMatrix> {
    let zero = SectorMatrix::new([[0.0; 2]; 2]);
    let (k_nodes, q_nodes) = match dist {
        MomentumDistribution::Point { kappa, chi } => (vec![(*kappa, 1.0)], vec![(*chi, 1.0)]),
        MomentumDistribution::Gaussian { center, width, chi } => {
            (gaussian_nodes(*center, *width, spec)?, vec![(*chi, 1.0)])
        }
        MomentumDistribution::GaussianJoint {
            center,
            width,
            chi_center,
            chi_width,
        } => (
            gaussian_nodes(*center, *width, spec)?,
            gaussian_nodes(*chi_center, *chi_width, spec)?,
        ),
        MomentumDistribution::Weighted(points) => {
            let kept: Vec<_> = points.iter().filter(|(k, q, w)| *k > 0.0 && *q > 0.0 && *w > 0.0).collect();
            let mass: f64 = kept.iter().map(|(_, _, w)| w).sum();
            if !(mass > 0.0) {
                return Err(DistillError::InsufficientMass(0.0));
            }
            let mut acc = zero;
            for &&(k, q, w) in &kept {
                acc = acc + sector_protocol(k, q, g)?.scale(w / mass);
            }
            return Ok(acc);
        }
    };
    let mut t = zero;
    let mut r = zero;
    for &(k, w) in &k_nodes {
        t = t + sector_t(k, g)?.scale(w);
        r = r + sector_r(k, g)?.scale(w);
    }
    let mut s = zero;
    for &(q, w) in &q_nodes {
        s = s + sector_s(q, g)?.scale(w);
    }
    Ok(t + s * r)
}

/// Gaussian spread `delta_kappa` around `kappa_n = n pi` with fixed `chi`.
/// Returns the averaged matrix and its stationary singlet weight.
pub fn averaged_sector(n: u32, delta_kappa: f64, chi: f64, g: f64) -> Result<(SectorMatrix, f64)> {
    averaged_sector_with(n, delta_kappa, chi, g, QuadratureSpec::default())
}

/// [`averaged_sector_over`] with node doubling from `spec` until the entries
/// change by less than [`QUADRATURE_REFINEMENT_TOL`].
pub fn averaged_sector_converged(
    dist: &MomentumDistribution,
    g: f64,
    spec: QuadratureSpec,
) -> Result<Converged<SectorMatrix>> {
    refine_quadrature(
        spec,
        QUADRATURE_REFINEMENT_TOL,
        MAX_QUADRATURE_NODES,
        |s| averaged_sector_over(dist, g, s),
        |a, b| a.max_abs_diff(b),
    )
}

/// As [`averaged_sector`], refining from the starting quadrature `spec`.
pub fn averaged_sector_with(
    n: u32,
    delta_kappa: f64,
    chi: f64,
    g: f64,
    spec: QuadratureSpec,
) -> Result<(SectorMatrix, f64)> {
    let dist = MomentumDistribution::Gaussian {
        center: n as f64 * PI,
        width: delta_kappa,
        chi,
    };
    let m = averaged_sector_converged(&dist, g, spec)?.value;
    Ok((m, fixed_fidelity(&m)?))
}

/// `1 - (1 - F0)(1 - W_q V_n)^N`: singlet weight after `N` ideal cycles.
pub fn closed_form_curve(n: u32, chi: f64, g: f64, f0: f64, cycles: usize) -> Result<f64> {
    let gain = w_coefficient(chi, g)? * v_coefficient(n, g);
    Ok(1.0 - (1.0 - f0) * (1.0 - gain).powi(cycles as i32))
}
