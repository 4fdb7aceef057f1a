//! Shared numerical kernels: dense LU, adaptive quadrature, finite
//! differences and the Numerov integrator. Everything here is scale-naive;
//! callers that need overflow protection factor out scales first.

pub mod diff;
pub mod linalg;
pub mod ode;
pub mod quadrature;

pub use diff::{derivative, log_derivative, second_derivative, second_log_derivative};
pub use linalg::{lin_solve, lu_det, Lu, Matrix};
pub use ode::{numerov_integrate, GridSpec};
pub use quadrature::{integrate, integrate_with_error, QuadratureSpec};
