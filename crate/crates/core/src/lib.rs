//! Radial spectral simulator for the fourth-order nonlinear Schrödinger
//! equation with potential,
//!
//! ```text
//! i ∂_t u + Δ² u + V u + λ |u|^{p-1} u = 0,   x ∈ R^n, n >= 5,
//! ```
//!
//! together with the measurement machinery used to probe it numerically:
//! conserved quantities, space-time norms, dispersive decay, Strichartz
//! quotients, localized-mass and Morawetz functionals, and scattering.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod harness;
pub mod potentials;
pub mod radial;
pub mod scattering;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
