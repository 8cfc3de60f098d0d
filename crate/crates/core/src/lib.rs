//! Linear onset of phototactic bioconvection in a rotating, isotropically
//! scattering algal suspension lit by an oblique collimated beam.
//!
//! The pipeline runs bottom-up:
//!
//! * [`radlight`] solves the basic-state radiative transfer for `Λ(τ)`;
//! * [`equilib`] shoots the equilibrium cell-concentration profile;
//! * [`perturb`] builds the linear maps from a concentration perturbation to
//!   the perturbed diffuse intensity and horizontal flux;
//! * [`stability`] assembles the `(W, Z, Φ)` eigenproblem, traces neutral
//!   curves and locates critical points.

pub mod equilib;
pub mod error;
pub mod perturb;
pub mod radlight;
pub mod specfun;
pub mod stability;

pub use error::{Error, Result};
