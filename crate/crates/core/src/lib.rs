//! Birman–Schwinger operators and (modified) Fredholm determinants.
//!
//! The crate discretizes Birman–Schwinger kernels of Schrödinger operators by
//! Nyström quadrature and evaluates the determinant identities that connect
//! them to Jost functions, Weyl–Titchmarsh m-functions, eigenvalue
//! multiplicities, the Krein spectral shift function and the scattering
//! determinant.
//!
//! Module map:
//! - [`detcore`]: determinants, regularized determinants, Riesz projections and
//!   contour multiplicity counting on dense complex matrices.
//! - [`quadrature`]: quadrature rules and Nyström assembly.
//! - [`specfun`]: branch-correct square roots, cylindrical and spherical Bessel
//!   functions.
//! - [`abstract_bs`]: finite-dimensional factored perturbations `H = H0 + B*A`.
//! - [`halfline`]: Jost solutions and Dirichlet/Neumann determinants on `(0, ∞)`.
//! - [`scattering`]: partial-wave det₂, spectral shift and scattering determinant
//!   for radial potentials in two and three dimensions.
//! - [`disk_domain`]: Dirichlet/Neumann determinant ratio on the unit disk.

pub mod abstract_bs;
pub mod detcore;
pub mod disk_domain;
mod error;
pub mod halfline;
pub mod potential;
pub mod quadrature;
pub mod scattering;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;

/// Seed used for every reproducible random instance (tests, acceptance runs, CLI default).
pub const DEFAULT_SEED: u64 = 20_061_009;

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
