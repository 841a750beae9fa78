//! Simulation of a feedback scattering protocol that drives two fixed qubits
//! `A` and `B` into the singlet state by repeatedly scattering flying ancilla
//! qubits `X` off them.
//!
//! The crate is organised bottom-up:
//!
//! * [`spin_algebra`]: Pauli operators, singlet/triplet and spin-3/2 /
//!   spin-1/2 projectors on the three-spin space, partial trace over `X`.
//! * [`scattering`]: closed-form transmission and reflection operators.
//! * [`channels`]: superoperators on `AB`, spectra, fixed points, iteration.
//! * [`sector`]: the 2x2 singlet/triplet population model.
//! * [`trajectory`]: Monte Carlo unraveling of the protocol into single runs.
//!
//! All quantities are dimensionless: momenta enter as `kappa = k d` and the
//! coupling as `G = m g d / hbar^2`.

pub mod channels;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod scattering;
pub mod sector;
pub mod spin_algebra;
pub mod trajectory;

pub use channels::{DetectorVariant, MomentumDistribution, Superoperator};
pub use error::{DistillError, Result};
pub use linalg::C64;
pub use scattering::{PhysicalParams, ScatterPair};
pub use spin_algebra::{AbState, SpinOperator};
