//! Operator algebra on the three-spin space `X (x) A (x) B`.
//!
//! Basis kets are `|s_X s_A s_B>` with spin up at index 0 and `X` the
//! slowest-varying index, i.e. `index = 4 s_X + 2 s_A + s_B`.

use crate::error::{DistillError, Result};
use crate::linalg::{self, kron, re, Mat2, Mat4, Mat8, C64, I};

/// An operator on the 8-dimensional spin space of `X`, `A` and `B`.
pub type SpinOperator = Mat8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    X,
    A,
    B,
}

pub fn pauli2(axis: Axis) -> Mat2 {
    let (o, l) = (C64::new(0.0, 0.0), re(1.0));
    match axis {
        Axis::X => Mat2::new(o, l, l, o),
        Axis::Y => Mat2::new(o, -I, I, o),
        Axis::Z => Mat2::new(l, o, o, -l),
    }
}

fn kron3(x: &Mat2, a: &Mat2, b: &Mat2) -> Mat8 {
    let ab: Mat4 = kron(a, b);
    kron(x, &ab)
}

/// `sigma_axis` acting on `site`, tensored with identities elsewhere.
pub fn pauli(axis: Axis, site: Site) -> SpinOperator {
    let s = pauli2(axis);
    let id = Mat2::identity();
    match site {
        Site::X => kron3(&s, &id, &id),
        Site::A => kron3(&id, &s, &id),
        Site::B => kron3(&id, &id, &s),
    }
}

/// Component `axis` of the total spin `sigma^X + sigma^A + sigma^B`.
pub fn total_spin(axis: Axis) -> SpinOperator {
    pauli(axis, Site::X) + pauli(axis, Site::A) + pauli(axis, Site::B)
}

/// `sigma^(s1) . sigma^(s2)`.
pub fn spin_dot(s1: Site, s2: Site) -> SpinOperator {
    Axis::ALL
        .iter()
        .map(|&a| pauli(a, s1) * pauli(a, s2))
        .fold(Mat8::zeros(), |acc, m| acc + m)
}

/// Lifts an `AB` operator to the full space by tensoring the identity on `X`.
pub fn lift_ab(op: &Mat4) -> SpinOperator {
    kron(&Mat2::identity(), op)
}

/// Lifts `rho_X (x) rho_AB`.
pub fn product_operator(x: &Mat2, ab: &Mat4) -> SpinOperator {
    kron(x, ab)
}

/// The fixed projector and transition algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Projectors {
    /// Singlet projector on `AB`, lifted with the identity on `X`.
    pub p_minus: SpinOperator,
    /// Triplet projector on `AB`, lifted.
    pub p_plus: SpinOperator,
    /// Total spin 3/2 sector of `XAB`.
    pub q_32: SpinOperator,
    /// Total spin 1/2 sector of `XAB`.
    pub q_12: SpinOperator,
    /// Singlet to triplet transitions, `sigma^X . Sigma_+`.
    pub k_plus: SpinOperator,
    /// Triplet to singlet transitions, `sigma^X . Sigma_-`.
    pub k_minus: SpinOperator,
}

pub fn build_projectors() -> Projectors {
    let id = Mat8::identity();
    let ab = spin_dot(Site::A, Site::B);
    let p_minus = (id - ab).scale(0.25);
    let p_plus = (id.scale(3.0) + ab).scale(0.25);

    let x_dot_ab = spin_dot(Site::X, Site::A) + spin_dot(Site::X, Site::B);
    let q_32 = p_plus.scale(2.0 / 3.0) + x_dot_ab.scale(1.0 / 6.0);
    let q_12 = p_minus + p_plus.scale(1.0 / 3.0) - x_dot_ab.scale(1.0 / 6.0);

    // Sigma_+ = ((sigma^A - sigma^B) + i sigma^A x sigma^B) / 2, componentwise.
    let sa = |a| pauli(a, Site::A);
    let sb = |a| pauli(a, Site::B);
    let cross = |a: Axis| match a {
        Axis::X => sa(Axis::Y) * sb(Axis::Z) - sa(Axis::Z) * sb(Axis::Y),
        Axis::Y => sa(Axis::Z) * sb(Axis::X) - sa(Axis::X) * sb(Axis::Z),
        Axis::Z => sa(Axis::X) * sb(Axis::Y) - sa(Axis::Y) * sb(Axis::X),
    };
    let mut k_plus = Mat8::zeros();
    let mut k_minus = Mat8::zeros();
    for a in Axis::ALL {
        let sigma_plus = (sa(a) - sb(a) + cross(a) * I).scale(0.5);
        let sx = pauli(a, Site::X);
        k_plus += sx * sigma_plus;
        k_minus += sx * sigma_plus.adjoint();
    }

    Projectors {
        p_minus,
        p_plus,
        q_32,
        q_12,
        k_plus,
        k_minus,
    }
}

/// Contracts the `X` index pair of an 8x8 operator.
pub fn partial_trace_x(op: &SpinOperator) -> Mat4 {
    Mat4::from_fn(|i, j| op[(i, j)] + op[(i + 4, j + 4)])
}

/// The `AB` block `<x_out| op |x_in>` of an 8x8 operator.
pub fn x_block(op: &SpinOperator, x_out: usize, x_in: usize) -> Mat4 {
    op.fixed_view::<4, 4>(4 * x_out, 4 * x_in).into_owned()
}

/// `|Psi^->` = (|ud> - |du>)/sqrt 2 in the `AB` basis.
pub fn singlet_vector() -> linalg::Vec4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    linalg::Vec4::new(re(0.0), re(h), re(-h), re(0.0))
}

pub fn singlet_projector_ab() -> Mat4 {
    let v = singlet_vector();
    v * v.adjoint()
}

pub fn triplet_projector_ab() -> Mat4 {
    Mat4::identity() - singlet_projector_ab()
}

/// Default tolerances for [`AbState`] validation.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Density matrix of the qubit pair `AB` over kets `|s_A s_B>`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbState(Mat4);

impl AbState {
    /// Validates with the strict default tolerances.
    pub fn new(m: Mat4) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL)
    }

    pub fn with_tolerance(m: Mat4, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<Self> {
        check_density(&m, herm_tol, trace_tol, pos_tol)?;
        Ok(AbState(m))
    }

    /// Wraps a matrix already known to be a density matrix, e.g. a channel
    /// output.
    pub fn from_matrix_unchecked(m: Mat4) -> Self {
        AbState(m)
    }

    pub fn maximally_mixed() -> Self {
        AbState(Mat4::identity().scale(0.25))
    }

    pub fn singlet() -> Self {
        AbState(singlet_projector_ab())
    }

    /// Projector on a computational basis ket `|s_A s_B>` (0 = up).
    pub fn basis(s_a: usize, s_b: usize) -> Self {
        let mut m = Mat4::zeros();
        m[(2 * s_a + s_b, 2 * s_a + s_b)] = re(1.0);
        AbState(m)
    }

    pub fn pure(psi: &linalg::Vec4) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(DistillError::InvalidState("zero state vector".into()));
        }
        let v = psi.unscale(norm);
        Ok(AbState(v * v.adjoint()))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    /// Singlet weight `Tr{P_- rho}`.
    pub fn singlet_fidelity(&self) -> f64 {
        let v = singlet_vector();
        (v.adjoint() * self.0 * v)[(0, 0)].re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.0)[0]
    }
}

/// Hermiticity, unit trace and positivity check shared by all density
/// matrix inputs.
pub fn check_density<const N: usize>(
    m: &nalgebra::SMatrix<C64, N, N>,
    herm_tol: f64,
    trace_tol: f64,
    pos_tol: f64,
) -> Result<()> {
    let herm = linalg::hermiticity_defect(m);
    if !(herm <= herm_tol) {
        return Err(DistillError::InvalidState(format!(
            "hermiticity defect {herm:e}"
        )));
    }
    let tr = linalg::trace(m);
    if !((tr - re(1.0)).norm() <= trace_tol) {
        return Err(DistillError::InvalidState(format!("trace {tr}")));
    }
    let min = linalg::hermitian_eigenvalues(m)[0];
    if min < -pos_tol {
        return Err(DistillError::InvalidState(format!(
            "minimum eigenvalue {min:e}"
        )));
    }
    Ok(())
}
