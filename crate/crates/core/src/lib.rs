//! One-axis reduction of nonlinear dynamical Cosserat elasticity: energy
//! functionals, the dispersion map `k(v)`, double sine-Gordon kinks and a
//! method-of-lines integrator for the coupled field equations.

// `!(x > 0.0)` is the NaN-rejecting guard throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod cli;
pub mod dispersion;
pub mod energy;
pub mod jet;
pub mod params;
mod quad;
pub mod simulate;
pub mod soliton;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use params::MaterialParams;
