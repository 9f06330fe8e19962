//! Composite shock-profile / rarefaction waves of the one-dimensional
//! isothermal Navier–Stokes–Poisson system.
//!
//! The crate builds the Riemann fan of the quasi-neutral Euler system, the
//! smooth approximate rarefaction, the viscous-electrostatic shock profile,
//! and evolves perturbed data in the shock's moving frame with a dynamically
//! computed shift, reporting energy-type diagnostics along the way.

pub mod cli;
pub mod composite;
pub mod config;
pub mod error;
pub mod evolve;
pub mod functionals;
pub mod numerics;
pub mod output;
pub mod poisson;
pub mod rarefaction;
pub mod shift;
pub mod shock_profile;
pub mod thermo;
pub mod verify;

pub use error::{Result, WaveError};
