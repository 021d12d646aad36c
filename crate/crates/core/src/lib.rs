//! Covariant Hopfield model of the electromagnetic field coupled to a
//! harmonic polarization field in a dispersive dielectric.
//!
//! Gaussian units are used throughout with `c` explicit. Four-vectors are
//! contravariant with metric `diag(+1, -1, -1, -1)`; derivatives `∂_μ` are
//! covariant with `x^0 = c t`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod constraints;
pub mod error;
pub mod kinematics;
pub mod linalg;
pub mod medium;
pub mod modes;
pub mod ode;
pub mod products;
pub mod quanta;
pub mod scattering;
pub mod validation;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Feynman gauge parameter `ξ = 4π`.
pub const FEYNMAN_XI: f64 = 4.0 * std::f64::consts::PI;
