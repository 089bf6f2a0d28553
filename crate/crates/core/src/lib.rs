//! Traveling waves of the Kawahara equation and transverse spectra of the
//! fifth-order KP equation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
mod fd;
pub mod fourier;
pub mod linalg;
pub mod ode;
pub mod periodic;
pub mod solitary;
pub mod spectra;

pub use error::{Error, Result};
pub use fourier::TruncatedFourierSeries;
