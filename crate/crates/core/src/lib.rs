//! Keldysh field theory of the free-electron laser, end to end.
//!
//! Beam occupations feed the electronic self-energies, which dress the
//! radiation propagator. Its zero gives the dispersion and threshold, its
//! low-frequency expansion the Landau-Ginzburg-Keldysh parameters, and those
//! drive a stochastic laser equation. A classical mode-space integrator of the
//! saddle-point equations serves as an independent check on linear gain.

pub mod beam;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod langevin;
pub mod lgk;
pub mod meanfield;
pub mod selfenergy;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
