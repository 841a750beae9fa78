//! Fixed-size complex matrix helpers shared by every module.
//!
//! Vectorization is column-major throughout: `vec(rho)[i + 4 j] = rho[(i, j)]`.
//! Under this convention the map `rho -> A rho B^dag` has superoperator
//! matrix `conj(B) (x) A`.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;

pub type Mat2 = SMatrix<C64, 2, 2>;
pub type Mat4 = SMatrix<C64, 4, 4>;
pub type Mat8 = SMatrix<C64, 8, 8>;
pub type Mat16 = SMatrix<C64, 16, 16>;
pub type Vec4 = SVector<C64, 4>;
pub type Vec8 = SVector<C64, 8>;
pub type Vec16 = SVector<C64, 16>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Kronecker product `a (x) b` for statically sized operands.
pub fn kron<const R1: usize, const C1: usize, const R2: usize, const C2: usize, const R: usize, const C: usize>(
    a: &SMatrix<C64, R1, C1>,
    b: &SMatrix<C64, R2, C2>,
) -> SMatrix<C64, R, C> {
    debug_assert_eq!(R, R1 * R2);
    debug_assert_eq!(C, C1 * C2);
    SMatrix::from_fn(|i, j| a[(i / R2, j / C2)] * b[(i % R2, j % C2)])
}

pub fn vectorize(rho: &Mat4) -> Vec16 {
    Vec16::from_fn(|k, _| rho[(k % 4, k / 4)])
}

pub fn unvectorize(v: &Vec16) -> Mat4 {
    Mat4::from_fn(|i, j| v[i + 4 * j])
}

pub fn frobenius<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace<const N: usize>(m: &SMatrix<C64, N, N>) -> C64 {
    (0..N).map(|i| m[(i, i)]).sum()
}

/// Frobenius distance between `m` and its conjugate transpose.
pub fn hermiticity_defect<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    frobenius(&(m - m.adjoint()))
}

/// Sorted (ascending) eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues<const N: usize>(m: &SMatrix<C64, N, N>) -> Vec<f64> {
    let h = nalgebra::DMatrix::from_fn(N, N, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Trace norm distance `||a - b||_1 / 2` for Hermitian matrices.
pub fn trace_distance<const N: usize>(a: &SMatrix<C64, N, N>, b: &SMatrix<C64, N, N>) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b))
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
}

pub fn identity<const N: usize>() -> SMatrix<C64, N, N> {
    SMatrix::identity()
}
