//! Closed-form transmission and reflection operators for an ancilla
//! scattered off the two fixed spins.

use std::f64::consts::PI;

use crate::error::{DistillError, Result};
use crate::linalg::{re, Mat2, Mat8, C64, I};
use crate::spin_algebra::{self, build_projectors, check_density, AbState, SpinOperator};

/// Dimensionless problem parameters.
///
/// `kappa = k d` is the resonant-leg momentum, `chi = q d` the off-resonant
/// momentum, `g = m g d / hbar^2` the coupling. `n` labels the target
/// resonance `kappa_n = n pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub kappa: f64,
    pub chi: f64,
    pub g: f64,
    pub n: u32,
    pub delta_kappa: f64,
    pub eta: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            kappa: PI,
            chi: 2.5 * PI,
            g: PI,
            n: 1,
            delta_kappa: 0.0,
            eta: 1.0,
        }
    }
}

impl PhysicalParams {
    /// Parameters sitting exactly on resonance `n`.
    pub fn resonant(n: u32, chi: f64, g: f64) -> Self {
        PhysicalParams {
            kappa: n as f64 * PI,
            chi,
            g,
            n,
            ..Default::default()
        }
    }

    pub fn kappa_n(&self) -> f64 {
        self.n as f64 * PI
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(DistillError::InvalidParams(what));
        if !(self.kappa > 0.0) {
            return Err(DistillError::NonPositiveMomentum(self.kappa));
        }
        if !(self.chi > 0.0) {
            return Err(DistillError::NonPositiveMomentum(self.chi));
        }
        if self.g == 0.0 || !self.g.is_finite() {
            return bad(format!("coupling must be finite and nonzero, got {}", self.g));
        }
        if self.n < 1 {
            return bad("resonance index must be >= 1".into());
        }
        if !(self.delta_kappa >= 0.0) {
            return bad(format!("delta_kappa must be >= 0, got {}", self.delta_kappa));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return bad(format!("eta must lie in [0, 1], got {}", self.eta));
        }
        Ok(())
    }
}

/// Scalar coefficients of the scattering operators at one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub omega: f64,
    pub alpha: C64,
    pub beta: C64,
    /// `1 - e^{2 i kappa}`, the factor that vanishes on resonance.
    pub detuning: C64,
}

/// Momenta below this are outside the validated range; `omega` grows as
/// `1 / kappa`.
pub const MIN_VALIDATED_KAPPA: f64 = 1e-3 * PI;

pub fn coefficients(kappa: f64, g: f64) -> Result<Coefficients> {
    if !(kappa > 0.0) {
        return Err(DistillError::NonPositiveMomentum(kappa));
    }
    let omega = g / kappa;
    let u = re(1.0) - (I * (2.0 * kappa)).exp();
    let o = re(omega);
    let alpha = (re(1.0) - I * 4.0 * omega
        + o * o * 2.0 * (re(1.0) - I * 6.0 * omega) * u
        + o.powi(4) * 9.0 * u * u)
        .inv();
    let beta = (re(1.0) + I * 2.0 * omega - o * o * u).inv();
    Ok(Coefficients {
        omega,
        alpha,
        beta,
        detuning: u,
    })
}

/// Transmission and reflection operators at one momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPair {
    pub t: SpinOperator,
    pub r: SpinOperator,
    pub kappa: f64,
}

impl ScatterPair {
    /// General closed forms, valid for any `kappa > 0` including resonances.
    pub fn at(kappa: f64, g: f64) -> Result<Self> {
        let c = coefficients(kappa, g)?;
        let p = build_projectors();
        let id = Mat8::identity();
        let (a, b, o, u) = (c.alpha, c.beta, re(c.omega), c.detuning);
        let phase = (I * kappa).exp();

        let core = p.p_minus * (a * (re(1.0) - I * 4.0 * c.omega))
            + (p.q_12 * a + p.q_32 * b) * p.p_plus
            - (p.p_minus - p.q_12 * p.p_plus * re(3.0) - p.k_plus + p.k_minus) * (a * o * o * u);
        let t = core * phase;

        let k_sum = p.k_plus + p.k_minus;
        let bracket = p.p_minus * (a * o * o * u * 6.0)
            + (p.q_12 * (a * 2.0) - p.q_32 * b) * p.p_plus
            + (id * (re(1.0) + o * o * u * 3.0) - p.p_plus * (I * 4.0 * c.omega)) * k_sum * (a * 0.5);
        let r = core - id - bracket * (I * o * u);

        Ok(ScatterPair { t, r, kappa })
    }

    /// Simplified forms at the resonance `kappa_n = n pi`.
    pub fn resonant(n: u32, g: f64) -> Result<Self> {
        if n < 1 {
            return Err(DistillError::InvalidParams("resonance index must be >= 1".into()));
        }
        if g == 0.0 {
            return Err(DistillError::InvalidParams("coupling must be nonzero".into()));
        }
        let kappa = n as f64 * PI;
        let omega = g / kappa;
        let p = build_projectors();
        let d12 = re(1.0) - I * 4.0 * omega;
        let d32 = re(1.0) + I * 2.0 * omega;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let t = (p.p_minus + (p.q_12 / d12 + p.q_32 / d32) * p.p_plus) * re(sign);
        let r = (p.q_12 * (I * 4.0 * omega / d12) - p.q_32 * (I * 2.0 * omega / d32)) * p.p_plus;
        Ok(ScatterPair { t, r, kappa })
    }

    /// `||T^dag T + R^dag R - 1||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        crate::linalg::frobenius(
            &(self.t.adjoint() * self.t + self.r.adjoint() * self.r - Mat8::identity()),
        )
    }
}

pub fn scatter_operators(params: &PhysicalParams) -> Result<ScatterPair> {
    ScatterPair::at(params.kappa, params.g)
}

pub fn resonant_operators(n: u32, g: f64) -> Result<ScatterPair> {
    ScatterPair::resonant(n, g)
}

const DENSITY_INPUT_TOL: f64 = 1e-9;

fn probability_of(op: &SpinOperator, spin_x: &Mat2, rho_ab: &AbState) -> Result<f64> {
    check_density(spin_x, DENSITY_INPUT_TOL, DENSITY_INPUT_TOL, DENSITY_INPUT_TOL)?;
    check_density(rho_ab.matrix(), DENSITY_INPUT_TOL, DENSITY_INPUT_TOL, DENSITY_INPUT_TOL)?;
    let full = spin_algebra::product_operator(spin_x, rho_ab.matrix());
    Ok(crate::linalg::trace(&(op * full * op.adjoint())).re)
}

/// `Tr{T (rho_X (x) rho_AB) T^dag}` at `params.kappa`.
pub fn transmission_probability(params: &PhysicalParams, spin_x: &Mat2, rho_ab: &AbState) -> Result<f64> {
    let pair = ScatterPair::at(params.kappa, params.g)?;
    probability_of(&pair.t, spin_x, rho_ab)
}

pub fn reflection_probability(params: &PhysicalParams, spin_x: &Mat2, rho_ab: &AbState) -> Result<f64> {
    let pair = ScatterPair::at(params.kappa, params.g)?;
    probability_of(&pair.r, spin_x, rho_ab)
}

/// Convenience: `|up><up|` for the ancilla.
pub fn spin_up() -> Mat2 {
    let mut m = Mat2::zeros();
    m[(0, 0)] = re(1.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, Mat4, Vec8};
    use crate::spin_algebra::{singlet_vector, total_spin, Axis};

    #[test]
    fn coefficients_on_resonance() {
        let c = coefficients(PI, PI).unwrap();
        assert!((c.omega - 1.0).abs() < 1e-15);
        assert!((c.alpha - (re(1.0) - I * 4.0).inv()).norm() < 1e-14);
        assert!((c.beta - (re(1.0) + I * 2.0).inv()).norm() < 1e-14);
    }

    #[test]
    fn coefficients_off_resonance() {
        let c = coefficients(2.5 * PI, PI).unwrap();
        assert!((c.omega - 0.4).abs() < 1e-15);
        let denom = c.alpha.inv();
        assert!((denom.re - 2.5616).abs() < 1e-3);
        assert!((denom.im + 3.136).abs() < 1e-3);
    }

    #[test]
    fn free_propagation_limit() {
        let c = coefficients(1.7, 0.0).unwrap();
        assert_eq!(c.omega, 0.0);
        assert!((c.alpha - re(1.0)).norm() < 1e-15);
        assert!((c.beta - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_momentum() {
        assert_eq!(coefficients(0.0, 1.0), Err(DistillError::NonPositiveMomentum(0.0)));
        assert!(ScatterPair::at(-1.0, 1.0).is_err());
    }

    #[test]
    fn general_form_matches_resonant_form() {
        for n in 1..=5 {
            for g in [0.5, PI, 5.0] {
                let gen = ScatterPair::at(n as f64 * PI, g).unwrap();
                let res = ScatterPair::resonant(n, g).unwrap();
                assert!(frobenius(&(gen.t - res.t)) < 1e-12, "T n={n} g={g}");
                assert!(frobenius(&(gen.r - res.r)) < 1e-12, "R n={n} g={g}");
            }
        }
    }

    #[test]
    fn resonant_t_singlet_block_has_sign() {
        let pair = ScatterPair::resonant(1, PI).unwrap();
        let p = build_projectors();
        assert!(frobenius(&(p.p_minus * pair.t * p.p_minus + p.p_minus)) < 1e-12);
        assert!(frobenius(&(pair.r * p.p_minus)) < 1e-12);
        assert!(frobenius(&(p.p_minus * pair.r)) < 1e-12);
    }

    #[test]
    fn singlet_is_transparent_on_resonance() {
        let psi = singlet_vector();
        for n in 1..=4 {
            let pair = ScatterPair::at(n as f64 * PI, PI).unwrap();
            // |up>, |down> and a superposition on X.
            for (cu, cd) in [(re(1.0), re(0.0)), (re(0.0), re(1.0)), (re(0.6), C64::new(0.0, 0.8))] {
                let mut v = Vec8::zeros();
                for i in 0..4 {
                    v[i] = cu * psi[i];
                    v[4 + i] = cd * psi[i];
                }
                assert!(((pair.t * v).norm_squared() - 1.0).abs() < 1e-12);
                assert!((pair.r * v).norm_squared() < 1e-24);
            }
        }
    }

    #[test]
    fn operators_are_rotation_covariant() {
        let pair = ScatterPair::at(1.37 * PI, 2.2).unwrap();
        for a in Axis::ALL {
            let j = total_spin(a);
            assert!(frobenius(&(pair.t * j - j * pair.t)) < 1e-12);
            assert!(frobenius(&(pair.r * j - j * pair.r)) < 1e-12);
        }
    }

    #[test]
    fn transmission_probability_examples() {
        let params = PhysicalParams::default();
        let p = transmission_probability(&params, &spin_up(), &AbState::singlet()).unwrap();
        assert!((p - 1.0).abs() < 1e-12);

        let free = PhysicalParams { kappa: 1.3, ..Default::default() };
        let pair = ScatterPair::at(free.kappa, 0.0).unwrap();
        assert!(frobenius(&(pair.t - Mat8::identity() * (I * 1.3).exp())) < 1e-14);

        let rho = AbState::basis(0, 1);
        let q = PhysicalParams { kappa: 1.9, g: 2.0, ..Default::default() };
        let t = transmission_probability(&q, &spin_up(), &rho).unwrap();
        let r = reflection_probability(&q, &spin_up(), &rho).unwrap();
        assert!((t + r - 1.0).abs() < 1e-12);
        assert!(t > 0.0 && t < 1.0);
    }

    #[test]
    fn transmission_probability_rejects_bad_inputs() {
        let params = PhysicalParams::default();
        let not_normalized = Mat2::identity();
        assert!(matches!(
            transmission_probability(&params, &not_normalized, &AbState::singlet()),
            Err(DistillError::InvalidState(_))
        ));
        let bad_ab = AbState::from_matrix_unchecked(Mat4::identity());
        assert!(transmission_probability(&params, &spin_up(), &bad_ab).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::default().validate().is_ok());
        let bad = PhysicalParams { eta: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PhysicalParams { g: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PhysicalParams { kappa: -1.0, ..Default::default() };
        assert_eq!(bad.validate(), Err(DistillError::NonPositiveMomentum(-1.0)));
    }
}
