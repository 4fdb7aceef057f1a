//! Reflectionless `sech²` potentials, their bound and scattering states, and the
//! phase-equivalent singular `cosech²` partners obtained by removing every bound
//! state.
//!
//! The crate is organised bottom-up:
//!
//! - [`special_functions`]: associated Legendre functions on `|z| < 1`, `y > 1`
//!   and in the complex plane, factorial helpers and normalisation constants.
//! - [`numerics`]: LU determinants and solves, adaptive Gauss–Kronrod
//!   quadrature, finite differences and a Numerov integrator.
//! - [`soliton`]: the Wronskian-type determinant matrices that add bound
//!   states to the free particle, with analytic log-determinant derivatives.
//! - [`potentials`] and [`ladder`]: the deep/singular potential pair, bound
//!   states, partner solutions and the supersymmetric ladder on the full line.
//! - [`scattering`]: scattering states, phase shifts by three independent
//!   routes, Levinson's theorem and the exact integral phase formula.
//! - [`phase_equiv`]: the overlap matrix that removes all bound states and the
//!   identities it implies.
//! - [`verify`]: the check registry behind the `susyqm` command line tool.

pub mod error;
pub mod ladder;
pub mod numerics;
pub mod phase_equiv;
pub mod polynomial;
pub mod potentials;
pub mod scattering;
pub mod soliton;
pub mod special_functions;
pub mod verify;

pub use error::{Error, Result};
