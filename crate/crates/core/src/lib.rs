//! Trace formulas, dispersion relations and Casimir energies for
//! one-dimensional and radial scattering problems.

// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boxsim;
pub mod cli;
pub mod error;
pub mod numeric;
pub mod potentials;
pub mod pvmath;
pub mod scatter3d;
pub mod scatter1d;
pub mod trace1d;
pub mod trace3d;

pub use error::{Error, ErrorClass, Result};
